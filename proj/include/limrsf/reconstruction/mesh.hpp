#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

/// RGBA with channels in [0, 1].
using Rgba = Eigen::Vector4d;
using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh with per-vertex color, support density and blind-spot
/// flag. `vertex_density` and `highlight` are empty until computed; when
/// present they, like `vertex_colors`, are parallel to `vertices`.
struct TriangleMesh
{
    std::vector<Point3> vertices;
    std::vector<Triangle> triangles;
    std::vector<Rgba> vertex_colors;
    std::vector<double> vertex_density;
    std::vector<std::uint8_t> highlight;

    std::size_t vertex_count() const noexcept { return vertices.size(); }
    std::size_t triangle_count() const noexcept { return triangles.size(); }
    bool has_densities() const noexcept { return !vertex_density.empty(); }
    bool has_highlights() const noexcept { return !highlight.empty(); }
    std::size_t highlighted_count() const;

    /// Throws InvalidArgument on out-of-range or repeated triangle indices,
    /// mismatched list lengths, or out-of-range channel values.
    void validate() const;
};

bool operator==(const TriangleMesh& a, const TriangleMesh& b);

/// Vertices, triangles and undirected edges, for Euler-characteristic checks.
struct MeshCounts
{
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t faces = 0;
    /// Edges used by a number of triangles other than two.
    std::size_t non_manifold_or_boundary_edges = 0;

    long long euler_characteristic() const
    {
        return static_cast<long long>(vertices) - static_cast<long long>(edges) + static_cast<long long>(faces);
    }
};

MeshCounts count_elements(const TriangleMesh& mesh);

/// Keeps the triangles whose three vertices lie in the closed box [lo, hi] and
/// drops vertices no kept triangle uses. Surviving elements keep their order.
TriangleMesh crop_mesh(const TriangleMesh& mesh, const Point3& lo, const Point3& hi);

} // namespace limrsf
