#pragma once

#include "limrsf/reconstruction/grid.hpp"
#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

/// Extracts the level set {x : f(x) = iso} of a cell-centred grid.
///
/// Each cube of eight neighbouring samples is split into six tetrahedra
/// sharing its main diagonal; the split is identical in every cube, so faces
/// match between neighbours and the output is a crack-free 2-manifold (closed
/// wherever the level set does not reach the grid border). Samples equal to
/// `iso` count as inside. Vertices on the same lattice edge are shared.
/// Triangles are wound so their normals point towards increasing f.
TriangleMesh extract_isosurface(const ScalarGrid<double>& field, double iso);

} // namespace limrsf
