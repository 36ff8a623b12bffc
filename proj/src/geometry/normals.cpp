#include "limrsf/geometry/normals.hpp"

#include <Eigen/Eigenvalues>

#include "limrsf/error.hpp"
#include "limrsf/geometry/spatial_index.hpp"

namespace limrsf {

NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params)
{
    if (cloud.empty())
        throw InvalidArgument("normal estimation: empty cloud");
    if (!(params.radius > 0.0))
        throw InvalidArgument("normal estimation: radius must be positive");
    if (params.min_neighbors < 1)
        throw InvalidArgument("normal estimation: min_neighbors must be positive");

    const SpatialIndex index(cloud);
    NormalEstimate result;
    result.cloud = cloud;
    result.cloud.normals.assign(cloud.size(), Point3::Zero());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Point3& p = cloud.points[i];
        // Raw moments about p.
        std::size_t count = 0;
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
        index.for_each_in_ball(p, params.radius, [&](std::size_t j) {
            const Eigen::Vector3d d = cloud.points[j] - p;
            ++count;
            sum += d;
            outer.noalias() += d * d.transpose();
        });
        if (count < params.min_neighbors) {
            result.degenerate.push_back(i);
            continue;
        }
        const Eigen::Vector3d mean = sum / static_cast<double>(count);
        const Eigen::Matrix3d cov = outer / static_cast<double>(count) - mean * mean.transpose();

        solver.compute(cov);
        // Coincident or collinear neighbourhoods leave the plane undefined.
        const Eigen::Vector3d& ev = solver.eigenvalues();
        if (!(ev[1] > 1e-12 * ev[2])) {
            result.degenerate.push_back(i);
            continue;
        }
        Point3 n = solver.eigenvectors().col(0).normalized();
        if (n.dot(params.viewpoint - p) < 0.0)
            n = -n;
        result.cloud.normals[i] = n;
    }
    return result;
}

} // namespace limrsf
