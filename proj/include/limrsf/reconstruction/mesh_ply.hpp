#pragma once

#include <string>
#include <string_view>

#include "limrsf/geometry/ply_format.hpp"
#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

/// Mesh PLY: element vertex with float x/y/z, uchar red/green/blue/alpha,
/// float density and uchar highlight; element face with
/// `list uchar int vertex_indices` (triangles only). Colors, density and
/// highlight are optional on input; the writer always emits colors, and
/// density/highlight when the mesh carries them.
TriangleMesh parse_mesh(std::string_view data);
std::string serialize_mesh(const TriangleMesh& mesh, ply::Format format);

TriangleMesh load_mesh(const std::string& path);
void save_mesh(const TriangleMesh& mesh, const std::string& path,
               ply::Format format = ply::Format::BinaryLittleEndian);

} // namespace limrsf
