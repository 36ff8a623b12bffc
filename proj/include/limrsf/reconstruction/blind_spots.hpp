#pragma once

#include <cstddef>

#include "limrsf/geometry/point_cloud.hpp"
#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

/// Support count of every vertex: the number of cloud points inside the
/// closed ball of `density_radius` around it.
TriangleMesh compute_vertex_densities(const TriangleMesh& mesh, const PointCloud& cloud, double density_radius);

struct HighlightParams
{
    /// Fraction of the mean vertex density below which a vertex is a blind spot.
    double density_threshold = 0.3;
    double base_alpha = 0.5;
    double highlight_alpha = 0.35;

    void validate() const;
};

struct HighlightStats
{
    double mean_density = 0.0;
    /// mean_density * density_threshold
    double threshold = 0.0;
    std::size_t highlighted = 0;
};

/// Marks vertices whose density is strictly below the threshold, paints them
/// red with highlight_alpha and gives every other vertex base_alpha.
TriangleMesh highlight_blind_spots(const TriangleMesh& mesh, const HighlightParams& params,
                                   HighlightStats* stats = nullptr);

/// Inverse-distance-weighted color over the k nearest cloud points, weights
/// 1 / (d + 1e-9). Alpha is left as it was.
TriangleMesh transfer_colors(const TriangleMesh& mesh, const PointCloud& cloud, std::size_t k);

} // namespace limrsf
