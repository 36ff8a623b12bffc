#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

/// Axis-aligned box, closed on both ends.
struct Box
{
    Point3 lo = Point3::Zero();
    Point3 hi = Point3::Zero();

    bool contains(const Point3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
    bool operator==(const Box& o) const { return lo == o.lo && hi == o.hi; }
};

/// Synthetic room scan. The room is centered at the origin with x across its
/// width, y along its depth and z up; the face at y = -depth/2 is open.
struct SceneSpec
{
    double width = 4.0;
    double depth = 3.0;
    double height = 2.5;
    double spacing = 0.02;
    std::vector<Box> holes;
    double noise_sigma = 0.005;
    std::size_t outliers = 200;
    std::uint64_t seed = 1;

    Box room() const;
    /// Throws InvalidArgument unless the extents and spacing are positive,
    /// noise is non-negative and every hole lies inside the room.
    void validate() const;
    bool operator==(const SceneSpec& o) const = default;
};

/// The default scene: one 1 m x 1 m hole centered on the back wall.
SceneSpec default_scene(std::uint64_t seed = 1);

/// Samples per face before holes are cut: round-down of extent / spacing
/// along each axis, with samples at cell centers.
std::size_t face_sample_count(const SceneSpec& spec);

/// Floor, ceiling, side walls and back wall sampled on cell-centered grids,
/// hole samples removed, Gaussian noise added, then `outliers` uniform points
/// in a box ten times the room. Every point gets a color hashed from its
/// noiseless position. Deterministic in the spec.
PointCloud generate_room_scan(const SceneSpec& spec);

} // namespace limrsf
