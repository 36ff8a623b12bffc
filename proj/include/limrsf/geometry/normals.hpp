#pragma once

#include <cstddef>
#include <vector>

#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

struct NormalParams
{
    double radius = 0.5;
    /// Normals are flipped to face this point.
    Point3 viewpoint = Point3::Zero();
    std::size_t min_neighbors = 3;
};

struct NormalEstimate
{
    /// Input cloud with `normals` filled in; degenerate points get a zero normal.
    PointCloud cloud;
    /// Indices whose closed-ball neighbourhood held fewer than min_neighbors
    /// points, or whose points were coincident or collinear.
    std::vector<std::size_t> degenerate;
};

/// PCA normals: the eigenvector of the smallest eigenvalue of the neighbourhood
/// covariance (population form, about the neighbourhood centroid), oriented so
/// that dot(n, viewpoint - p) >= 0.
NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params);

} // namespace limrsf
