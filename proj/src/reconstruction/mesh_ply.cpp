#include "limrsf/reconstruction/mesh_ply.hpp"

#include <algorithm>

#include "limrsf/error.hpp"
#include "limrsf/file_io.hpp"
#include "limrsf/geometry/ply.hpp"

namespace limrsf {

namespace {

struct VertexLayout
{
    int pos[3] = {-1, -1, -1};
    int color[4] = {-1, -1, -1, -1};
    int density = -1;
    int highlight = -1;
};

[[noreturn]] void header_fail(ParseErrorKind kind, std::size_t line, const std::string& msg)
{
    throw ParseError(kind, line, OffsetUnit::Line, msg);
}

VertexLayout vertex_layout(const ply::Element& e, std::size_t line)
{
    VertexLayout l;
    static const char* const pos_names[3] = {"x", "y", "z"};
    static const char* const color_names[4] = {"red", "green", "blue", "alpha"};
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& p = e.properties[i];
        const int slot = static_cast<int>(i);
        auto expect = [&](ply::Type t) {
            if (p.is_list || p.type != t)
                header_fail(ParseErrorKind::UnsupportedProperty, line,
                            "vertex property '" + p.name + "' must be " + ply::type_name(t));
        };
        bool known = false;
        for (int a = 0; a < 3; ++a) {
            if (p.name == pos_names[a]) {
                expect(ply::Type::Float32);
                l.pos[a] = slot;
                known = true;
            }
        }
        for (int a = 0; a < 4; ++a) {
            if (p.name == color_names[a]) {
                expect(ply::Type::UInt8);
                l.color[a] = slot;
                known = true;
            }
        }
        if (p.name == "density") {
            expect(ply::Type::Float32);
            l.density = slot;
            known = true;
        } else if (p.name == "highlight") {
            expect(ply::Type::UInt8);
            l.highlight = slot;
            known = true;
        }
        if (!known)
            header_fail(ParseErrorKind::UnsupportedProperty, line, "unknown vertex property '" + p.name + "'");
    }
    if (l.pos[0] < 0 || l.pos[1] < 0 || l.pos[2] < 0)
        header_fail(ParseErrorKind::MalformedHeader, line, "vertex element lacks x/y/z");
    return l;
}

} // namespace

TriangleMesh parse_mesh(std::string_view data)
{
    const ply::Header header = ply::parse_header(data);
    const std::size_t line = header.header_lines;
    const ply::Element* vertex = nullptr;
    const ply::Element* face = nullptr;
    for (const auto& e : header.elements) {
        if (e.name == "vertex" && !vertex && !face)
            vertex = &e;
        else if (e.name == "face" && vertex && !face)
            face = &e;
        else
            header_fail(ParseErrorKind::MalformedHeader, line, "unexpected element '" + e.name + "'");
    }
    if (!vertex)
        header_fail(ParseErrorKind::MalformedHeader, line, "mesh has no vertex element");
    const VertexLayout layout = vertex_layout(*vertex, line);
    if (face) {
        if (face->properties.size() != 1 || face->properties[0].name != "vertex_indices" ||
            !face->properties[0].is_list)
            header_fail(ParseErrorKind::UnsupportedProperty, line, "face element must be a single vertex_indices list");
        const auto t = face->properties[0].type;
        if (t != ply::Type::Int32 && t != ply::Type::UInt32)
            header_fail(ParseErrorKind::UnsupportedProperty, line, "vertex_indices must be int or uint");
    }

    TriangleMesh mesh;
    const std::size_t nv = vertex->count;
    mesh.vertices.resize(nv);
    mesh.vertex_colors.assign(nv, Rgba(0.8, 0.8, 0.8, 1.0));
    if (layout.density >= 0)
        mesh.vertex_density.resize(nv);
    if (layout.highlight >= 0)
        mesh.highlight.resize(nv);

    ply::BodyReader body(data, header);
    std::vector<double> row(vertex->properties.size());
    for (std::size_t v = 0; v < nv; ++v) {
        body.begin_row(*vertex);
        for (std::size_t p = 0; p < row.size(); ++p)
            row[p] = body.read_scalar(vertex->properties[p].type);
        body.end_row();
        for (int a = 0; a < 3; ++a)
            mesh.vertices[v][a] = row[static_cast<std::size_t>(layout.pos[a])];
        for (int a = 0; a < 4; ++a) {
            if (layout.color[a] >= 0)
                mesh.vertex_colors[v][a] = row[static_cast<std::size_t>(layout.color[a])] / 255.0;
        }
        if (layout.density >= 0)
            mesh.vertex_density[v] = row[static_cast<std::size_t>(layout.density)];
        if (layout.highlight >= 0)
            mesh.highlight[v] = row[static_cast<std::size_t>(layout.highlight)] != 0.0;
    }
    if (face) {
        const auto& prop = face->properties[0];
        mesh.triangles.resize(face->count);
        for (std::size_t f = 0; f < face->count; ++f) {
            body.begin_row(*face);
            const std::size_t n = body.read_count(prop.count_type);
            if (n != 3)
                throw ParseError(ParseErrorKind::UnsupportedProperty, body.offset(), body.unit(),
                                 "face " + std::to_string(f) + " has " + std::to_string(n) + " indices; only triangles are supported");
            for (int a = 0; a < 3; ++a) {
                const double idx = body.read_scalar(prop.type);
                if (idx < 0.0 || idx >= static_cast<double>(nv))
                    throw ParseError(ParseErrorKind::IndexOutOfRange, body.offset(), body.unit(),
                                     "face " + std::to_string(f) + " references vertex " +
                                         std::to_string(static_cast<long long>(idx)));
                mesh.triangles[f][a] = static_cast<std::uint32_t>(idx);
            }
            body.end_row();
        }
    }
    body.finish();
    return mesh;
}

std::string serialize_mesh(const TriangleMesh& mesh, ply::Format format)
{
    mesh.validate();
    std::string out = "ply\n" + ply::format_line(format);
    out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n";
    if (mesh.has_densities())
        out += "property float density\n";
    if (mesh.has_highlights())
        out += "property uchar highlight\n";
    out += "element face " + std::to_string(mesh.triangle_count()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";

    ply::BodyWriter body(format);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        for (int a = 0; a < 3; ++a)
            body.write_float(static_cast<float>(mesh.vertices[v][a]));
        for (int a = 0; a < 4; ++a)
            body.write_uchar(quantize_channel(mesh.vertex_colors[v][a]));
        if (mesh.has_densities())
            body.write_float(static_cast<float>(mesh.vertex_density[v]));
        if (mesh.has_highlights())
            body.write_uchar(mesh.highlight[v] ? 1 : 0);
        body.end_row();
    }
    for (const auto& t : mesh.triangles) {
        body.write_uchar(3);
        for (auto idx : t)
            body.write_int(static_cast<std::int32_t>(idx));
        body.end_row();
    }
    out += body.buffer();
    return out;
}

TriangleMesh load_mesh(const std::string& path)
{
    return parse_mesh(read_file(path));
}

void save_mesh(const TriangleMesh& mesh, const std::string& path, ply::Format format)
{
    write_file(path, serialize_mesh(mesh, format));
}

} // namespace limrsf
