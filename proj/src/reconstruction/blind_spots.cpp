#include "limrsf/reconstruction/blind_spots.hpp"

#include <algorithm>

#include "limrsf/error.hpp"
#include "limrsf/geometry/spatial_index.hpp"

namespace limrsf {

TriangleMesh compute_vertex_densities(const TriangleMesh& mesh, const PointCloud& cloud, double density_radius)
{
    if (mesh.vertices.empty() || cloud.empty())
        throw InvalidArgument("vertex densities need a non-empty mesh and cloud");
    if (!(density_radius > 0.0))
        throw InvalidArgument("density_radius must be positive");
    const SpatialIndex index(cloud);
    TriangleMesh out = mesh;
    out.vertex_density.resize(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        out.vertex_density[v] = static_cast<double>(index.radius_count(mesh.vertices[v], density_radius));
    return out;
}

void HighlightParams::validate() const
{
    if (!(density_threshold > 0.0))
        throw InvalidArgument("density_threshold must be positive");
    if (!(base_alpha >= 0.0 && base_alpha <= 1.0) || !(highlight_alpha >= 0.0 && highlight_alpha <= 1.0))
        throw InvalidArgument("alphas must lie in [0, 1]");
}

TriangleMesh highlight_blind_spots(const TriangleMesh& mesh, const HighlightParams& params, HighlightStats* stats)
{
    params.validate();
    if (!mesh.has_densities() || mesh.vertex_density.size() != mesh.vertices.size())
        throw InvalidArgument("highlighting needs vertex densities");

    HighlightStats s;
    double sum = 0.0;
    for (double d : mesh.vertex_density)
        sum += d;
    s.mean_density = mesh.vertices.empty() ? 0.0 : sum / static_cast<double>(mesh.vertices.size());
    s.threshold = s.mean_density * params.density_threshold;

    TriangleMesh out = mesh;
    out.highlight.assign(mesh.vertices.size(), 0);
    if (out.vertex_colors.size() != out.vertices.size())
        out.vertex_colors.assign(out.vertices.size(), Rgba(0.8, 0.8, 0.8, 1.0));
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
        if (out.vertex_density[v] < s.threshold) {
            out.highlight[v] = 1;
            out.vertex_colors[v] = Rgba(1.0, 0.0, 0.0, params.highlight_alpha);
            ++s.highlighted;
        } else {
            out.vertex_colors[v][3] = params.base_alpha;
        }
    }
    if (stats)
        *stats = s;
    return out;
}

TriangleMesh transfer_colors(const TriangleMesh& mesh, const PointCloud& cloud, std::size_t k)
{
    if (!cloud.has_colors())
        throw InvalidArgument("color transfer needs a colored cloud");
    if (k == 0)
        throw InvalidArgument("color transfer: k must be positive");
    const SpatialIndex index(cloud);
    const std::size_t kk = std::min(k, cloud.size());
    TriangleMesh out = mesh;
    if (out.vertex_colors.size() != out.vertices.size())
        out.vertex_colors.assign(out.vertices.size(), Rgba(0.8, 0.8, 0.8, 1.0));
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
        Color3 acc = Color3::Zero();
        double wsum = 0.0;
        for (const Neighbor& nb : index.knn(out.vertices[v], kk)) {
            const double w = 1.0 / (nb.distance + 1e-9);
            acc += w * cloud.colors[nb.index];
            wsum += w;
        }
        out.vertex_colors[v].head<3>() = (acc / wsum).cwiseMax(0.0).cwiseMin(1.0);
    }
    return out;
}

} // namespace limrsf
