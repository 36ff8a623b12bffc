#include "limrsf/reconstruction/mesh.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "limrsf/error.hpp"

namespace limrsf {

std::size_t TriangleMesh::highlighted_count() const
{
    return static_cast<std::size_t>(std::count_if(highlight.begin(), highlight.end(), [](auto h) { return h != 0; }));
}

void TriangleMesh::validate() const
{
    const std::size_t n = vertices.size();
    if (vertex_colors.size() != n)
        throw InvalidArgument("mesh: " + std::to_string(vertex_colors.size()) + " colors for " + std::to_string(n) +
                              " vertices");
    if (has_densities() && vertex_density.size() != n)
        throw InvalidArgument("mesh: density list length mismatch");
    if (has_highlights() && highlight.size() != n)
        throw InvalidArgument("mesh: highlight list length mismatch");
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (auto i : tri) {
            if (i >= n)
                throw InvalidArgument("mesh: triangle " + std::to_string(t) + " references vertex " +
                                      std::to_string(i) + " of " + std::to_string(n));
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw InvalidArgument("mesh: triangle " + std::to_string(t) + " is degenerate");
    }
    for (const auto& c : vertex_colors) {
        if ((c.array() < 0.0).any() || (c.array() > 1.0).any())
            throw InvalidArgument("mesh: color channel outside [0,1]");
    }
    for (double d : vertex_density) {
        if (!(d >= 0.0))
            throw InvalidArgument("mesh: negative density");
    }
}

bool operator==(const TriangleMesh& a, const TriangleMesh& b)
{
    return a.vertices == b.vertices && a.triangles == b.triangles && a.vertex_colors == b.vertex_colors &&
           a.vertex_density == b.vertex_density && a.highlight == b.highlight;
}

MeshCounts count_elements(const TriangleMesh& mesh)
{
    std::unordered_map<std::uint64_t, int> edge_use;
    edge_use.reserve(mesh.triangles.size() * 2);
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            std::uint64_t a = t[e], b = t[(e + 1) % 3];
            if (a > b)
                std::swap(a, b);
            ++edge_use[(a << 32) | b];
        }
    }
    MeshCounts counts;
    counts.vertices = mesh.vertices.size();
    counts.faces = mesh.triangles.size();
    counts.edges = edge_use.size();
    for (const auto& [key, uses] : edge_use)
        counts.non_manifold_or_boundary_edges += uses != 2;
    return counts;
}

TriangleMesh crop_mesh(const TriangleMesh& mesh, const Point3& lo, const Point3& hi)
{
    const std::size_t n = mesh.vertex_count();
    std::vector<std::uint8_t> inside(n);
    for (std::size_t v = 0; v < n; ++v)
        inside[v] = (mesh.vertices[v].array() >= lo.array()).all() && (mesh.vertices[v].array() <= hi.array()).all();

    constexpr std::uint32_t kDropped = 0xffffffffu;
    std::vector<std::uint32_t> remap(n, kDropped);
    std::vector<Triangle> kept;
    for (const Triangle& t : mesh.triangles) {
        if (inside[t[0]] && inside[t[1]] && inside[t[2]]) {
            kept.push_back(t);
            for (auto v : t)
                remap[v] = 0;
        }
    }
    TriangleMesh out;
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (remap[v] == kDropped)
            continue;
        remap[v] = next++;
        out.vertices.push_back(mesh.vertices[v]);
        if (!mesh.vertex_colors.empty())
            out.vertex_colors.push_back(mesh.vertex_colors[v]);
        if (mesh.has_densities())
            out.vertex_density.push_back(mesh.vertex_density[v]);
        if (mesh.has_highlights())
            out.highlight.push_back(mesh.highlight[v]);
    }
    for (Triangle& t : kept) {
        for (auto& v : t)
            v = remap[v];
    }
    out.triangles = std::move(kept);
    return out;
}

} // namespace limrsf
