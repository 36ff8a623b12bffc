#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

enum class SimplifyStatus
{
    /// The target vertex count was reached.
    Reached,
    /// No legal collapse remained before the target was reached.
    Exhausted,
    /// The target was not below the input vertex count; the mesh is unchanged.
    NoOp,
};

const char* to_string(SimplifyStatus status) noexcept;

struct SimplifyResult
{
    TriangleMesh mesh;
    SimplifyStatus status = SimplifyStatus::NoOp;
    std::size_t collapses = 0;
    /// Output vertex that each input vertex was merged into.
    std::vector<std::uint32_t> ancestry;
};

/// Greedy quadric-error edge collapse down to `target_vertex_count` vertices.
///
/// Each vertex starts with the area-weighted plane quadrics of its triangles.
/// The cheapest edge is collapsed to the minimizer of the summed quadric, or
/// to the cheapest of its endpoints and midpoint when that system is
/// ill-conditioned. Collapses on edges shared by more than two triangles,
/// collapses that would break the edge link condition and collapses that flip
/// a surrounding triangle are refused. Merged vertices average color and
/// density and OR their highlight flags. Ties break on vertex indices, so the
/// result is deterministic.
SimplifyResult simplify_mesh(const TriangleMesh& mesh, std::size_t target_vertex_count);

} // namespace limrsf
