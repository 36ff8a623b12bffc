#include "limrsf/geometry/ply.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "limrsf/error.hpp"
#include "limrsf/file_io.hpp"

namespace limrsf {

namespace {

struct Group
{
    std::array<const char*, 3> names;
    ply::Type type;
};

constexpr Group kPosition{{"x", "y", "z"}, ply::Type::Float32};
constexpr Group kColor{{"red", "green", "blue"}, ply::Type::UInt8};
constexpr Group kNormal{{"nx", "ny", "nz"}, ply::Type::Float32};

// Slot of each property within the row, or -1 when the group is absent.
std::array<int, 3> locate(const ply::Element& e, const Group& g, bool required, std::size_t line)
{
    std::array<int, 3> slots{};
    int found = 0;
    for (int c = 0; c < 3; ++c) {
        slots[c] = e.find(g.names[c]);
        found += slots[c] >= 0;
    }
    if (found == 0 && !required)
        return {-1, -1, -1};
    if (found != 3)
        throw ParseError(ParseErrorKind::MalformedHeader, line, OffsetUnit::Line,
                         std::string("incomplete property group ") + g.names[0] + "/" + g.names[1] + "/" +
                             g.names[2]);
    for (int s : slots) {
        const auto& p = e.properties[static_cast<std::size_t>(s)];
        if (p.is_list || p.type != g.type)
            throw ParseError(ParseErrorKind::UnsupportedProperty, line, OffsetUnit::Line,
                             "property '" + p.name + "' must be " + ply::type_name(g.type));
    }
    return slots;
}

} // namespace

std::uint8_t quantize_channel(double c)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(c * 255.0), 0L, 255L));
}

PointCloud parse_point_cloud(std::string_view data)
{
    const ply::Header header = ply::parse_header(data);
    const std::size_t line = header.header_lines;
    if (header.elements.size() != 1 || header.elements[0].name != "vertex")
        throw ParseError(ParseErrorKind::MalformedHeader, line, OffsetUnit::Line,
                         "point cloud must have exactly one element 'vertex'");
    const ply::Element& vertex = header.elements[0];
    for (const auto& p : vertex.properties) {
        static constexpr std::string_view known[] = {"x", "y", "z", "red", "green", "blue", "nx", "ny", "nz"};
        if (std::find(std::begin(known), std::end(known), p.name) == std::end(known))
            throw ParseError(ParseErrorKind::UnsupportedProperty, line, OffsetUnit::Line,
                             "unknown vertex property '" + p.name + "'");
    }
    const auto pos = locate(vertex, kPosition, true, line);
    const auto col = locate(vertex, kColor, false, line);
    const auto nrm = locate(vertex, kNormal, false, line);

    PointCloud cloud;
    cloud.points.resize(vertex.count);
    if (col[0] >= 0)
        cloud.colors.resize(vertex.count);
    if (nrm[0] >= 0)
        cloud.normals.resize(vertex.count);

    ply::BodyReader body(data, header);
    std::vector<double> row(vertex.properties.size());
    for (std::size_t i = 0; i < vertex.count; ++i) {
        body.begin_row(vertex);
        for (std::size_t p = 0; p < row.size(); ++p)
            row[p] = body.read_scalar(vertex.properties[p].type);
        body.end_row();
        for (int c = 0; c < 3; ++c) {
            cloud.points[i][c] = row[static_cast<std::size_t>(pos[c])];
            if (col[0] >= 0)
                cloud.colors[i][c] = row[static_cast<std::size_t>(col[c])] / 255.0;
            if (nrm[0] >= 0)
                cloud.normals[i][c] = row[static_cast<std::size_t>(nrm[c])];
        }
    }
    body.finish();
    return cloud;
}

std::string serialize_point_cloud(const PointCloud& cloud, ply::Format format)
{
    cloud.validate();
    std::string out = "ply\n" + ply::format_line(format);
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_colors())
        out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_normals())
        out += "property float nx\nproperty float ny\nproperty float nz\n";
    out += "end_header\n";

    ply::BodyWriter body(format);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < 3; ++c)
            body.write_float(static_cast<float>(cloud.points[i][c]));
        if (cloud.has_colors()) {
            for (int c = 0; c < 3; ++c)
                body.write_uchar(quantize_channel(cloud.colors[i][c]));
        }
        if (cloud.has_normals()) {
            for (int c = 0; c < 3; ++c)
                body.write_float(static_cast<float>(cloud.normals[i][c]));
        }
        body.end_row();
    }
    out += body.buffer();
    return out;
}

PointCloud load_point_cloud(const std::string& path)
{
    return parse_point_cloud(read_file(path));
}

void save_point_cloud(const PointCloud& cloud, const std::string& path, ply::Format format)
{
    write_file(path, serialize_point_cloud(cloud, format));
}

} // namespace limrsf
