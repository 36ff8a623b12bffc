#include "limrsf/reconstruction/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "limrsf/error.hpp"
#include "limrsf/reconstruction/marching.hpp"

namespace limrsf {

void ReconstructionParams::validate() const
{
    if (depth < 3 || depth > 9)
        throw InvalidArgument("reconstruction depth must be in [3, 9], got " + std::to_string(depth));
    if (!(smoothing_radius > 0.0))
        throw InvalidArgument("smoothing_radius must be positive");
    if (!(density_radius > 0.0))
        throw InvalidArgument("density_radius must be positive");
    if (!std::isfinite(iso_offset))
        throw InvalidArgument("iso_offset must be finite");
}

GridGeometry<double> fit_grid(const std::vector<Point3>& points, int depth)
{
    Point3 lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const int n = 1 << depth;
    const int pad = std::max(1, n / 16);
    const double extent = (hi - lo).maxCoeff();
    GridGeometry<double> g;
    g.resolution = n;
    g.spacing = extent / static_cast<double>(n - 1 - 2 * pad);
    const Point3 center = 0.5 * (lo + hi);
    g.origin = center - Point3::Constant(0.5 * g.spacing * (n - 1));
    return g;
}

namespace {

void splat(VectorGrid<double>& field, const Point3& p, const Point3& normal, double sigma)
{
    const auto& g = field.geometry;
    const int n = g.resolution;
    const double support = std::max(3.0 * sigma, 1.5 * g.spacing);
    const Point3 q = g.to_lattice(p);
    const double reach = support / g.spacing;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::ceil(q[a] - reach)));
        hi[a] = std::min(n - 1, static_cast<int>(std::floor(q[a] + reach)));
    }
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double s2 = support * support;
    double total = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        for (int k = lo[2]; k <= hi[2]; ++k) {
            for (int j = lo[1]; j <= hi[1]; ++j) {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    const double d2 = (g.center(i, j, k) - p).squaredNorm();
                    if (d2 > s2)
                        continue;
                    const double w = std::exp(-d2 * inv2s2);
                    if (pass == 0)
                        total += w;
                    else
                        field(i, j, k) += (w / total) * normal;
                }
            }
        }
        if (total <= 0.0)
            return;
    }
}

} // namespace

PoissonSurface poisson_reconstruct_detailed(const PointCloud& cloud, const ReconstructionParams& params)
{
    params.validate();
    if (!cloud.has_normals())
        throw InvalidArgument("poisson reconstruction needs normals");

    std::vector<Point3> points;
    std::vector<Point3> normals;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.normals[i].squaredNorm() > 0.0) {
            points.push_back(cloud.points[i]);
            normals.push_back(cloud.normals[i]);
        }
    }
    if (points.size() < 4)
        throw InvalidArgument("poisson reconstruction needs at least 4 valid normals, got " +
                              std::to_string(points.size()));
    const GridGeometry<double> geometry = fit_grid(points, params.depth);
    if (!(geometry.spacing > 0.0))
        throw InvalidArgument("poisson reconstruction: degenerate bounding box");

    PoissonSurface out;
    out.normal_field = VectorGrid<double>(geometry);
    for (std::size_t i = 0; i < points.size(); ++i)
        splat(out.normal_field, points[i], normals[i], params.smoothing_radius);

    out.divergence = poisson::divergence(out.normal_field);
    out.solve = poisson::solve(out.divergence, out.indicator, params.solver);

    double sum = 0.0;
    for (const auto& p : points)
        sum += out.indicator.sample(p);
    out.iso = sum / static_cast<double>(points.size()) + params.iso_offset;
    out.mesh = extract_isosurface(out.indicator, out.iso);
    if (params.crop_margin >= 0.0) {
        Point3 lo = points.front(), hi = points.front();
        for (const auto& p : points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Point3 grow = Point3::Constant(params.crop_margin * geometry.spacing);
        out.mesh = crop_mesh(out.mesh, lo - grow, hi + grow);
    }
    return out;
}

} // namespace limrsf
