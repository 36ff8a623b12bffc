#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace limrsf {

using Point3 = Eigen::Vector3d;
/// RGB with channels in [0, 1].
using Color3 = Eigen::Vector3d;

/// Positions with optional per-point colors and normals. The optional lists are
/// either empty or exactly as long as `points`. A zero normal marks a point whose
/// neighbourhood was too small to fit a plane.
struct PointCloud
{
    std::vector<Point3> points;
    std::vector<Color3> colors;
    std::vector<Point3> normals;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    bool has_colors() const noexcept { return !colors.empty(); }
    bool has_normals() const noexcept { return !normals.empty(); }

    /// Throws InvalidArgument when an invariant is broken.
    void validate() const;

    /// Subset in the order given by `indices`, optional lists carried along.
    PointCloud select(const std::vector<std::size_t>& indices) const;
};

bool operator==(const PointCloud& a, const PointCloud& b);

} // namespace limrsf
