#include "limrsf/stream/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "limrsf/error.hpp"

namespace limrsf::wire {
namespace {

static_assert(std::endian::native == std::endian::little, "wire encoding assumes a little-endian host");

template <typename T>
void put(std::string& out, T value)
{
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out.append(raw, sizeof(T));
}

template <typename T>
T get(std::string_view in, std::size_t at)
{
    T value;
    std::memcpy(&value, in.data() + at, sizeof(T));
    return value;
}

std::uint8_t quantize(double c)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

void need(std::string_view payload, std::size_t at, std::uint64_t bytes, const char* section)
{
    const std::size_t available = payload.size() - std::min(at, payload.size());
    if (bytes > available)
        throw ParseError(ParseErrorKind::TruncatedPayload, at, OffsetUnit::Byte,
                         std::string(section) + ": need " + std::to_string(bytes) + " bytes, " +
                             std::to_string(available) + " available");
}

} // namespace

MeshMessage to_message(const TriangleMesh& mesh)
{
    mesh.validate();
    MeshMessage m;
    const std::size_t n = mesh.vertex_count();
    m.positions.reserve(n);
    m.colors.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        m.positions.push_back(mesh.vertices[v].cast<float>());
        const Rgba& c = mesh.vertex_colors[v];
        m.colors.push_back(Rgba8(quantize(c[0]), quantize(c[1]), quantize(c[2]), quantize(c[3])));
    }
    m.triangles = mesh.triangles;
    if (mesh.has_densities()) {
        m.flags |= kFlagDensities;
        for (double d : mesh.vertex_density)
            m.densities.push_back(static_cast<float>(d));
    }
    return m;
}

TriangleMesh to_mesh(const MeshMessage& message)
{
    TriangleMesh mesh;
    const std::size_t n = message.positions.size();
    mesh.vertices.reserve(n);
    mesh.vertex_colors.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        mesh.vertices.push_back(message.positions[v].cast<double>());
        mesh.vertex_colors.push_back(message.colors[v].cast<double>() / 255.0);
    }
    mesh.triangles = message.triangles;
    if (message.has_densities())
        mesh.vertex_density.assign(message.densities.begin(), message.densities.end());
    return mesh;
}

std::string encode_message(const MeshMessage& m)
{
    const std::size_t n = m.positions.size();
    if (n > std::numeric_limits<std::uint32_t>::max() || m.triangles.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("mesh too large for the wire format");
    if (m.colors.size() != n)
        throw InvalidArgument("message has " + std::to_string(m.colors.size()) + " colors for " + std::to_string(n) +
                              " vertices");
    if (m.has_densities() != !m.densities.empty() && n > 0)
        throw InvalidArgument("density flag disagrees with the density list");
    if (m.has_densities() && m.densities.size() != n)
        throw InvalidArgument("density list length mismatch");
    if ((m.flags & ~kFlagDensities) != 0)
        throw InvalidArgument("unknown flag bits");

    std::string out;
    out.reserve(kHeaderSize + n * (12 + 4 + (m.has_densities() ? 4 : 0)) + m.triangles.size() * 12);
    put<std::uint16_t>(out, m.version);
    put<std::uint16_t>(out, m.flags);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.triangles.size()));
    for (const auto& p : m.positions) {
        for (int a = 0; a < 3; ++a)
            put<float>(out, p[a]);
    }
    for (const auto& c : m.colors)
        out.append(reinterpret_cast<const char*>(c.data()), 4);
    for (const auto& t : m.triangles) {
        for (auto i : t) {
            if (i >= n)
                throw InvalidArgument("triangle index " + std::to_string(i) + " out of range");
            put<std::uint32_t>(out, i);
        }
    }
    if (m.has_densities()) {
        for (float d : m.densities)
            put<float>(out, d);
    }
    return out;
}

std::string encode_mesh(const TriangleMesh& mesh)
{
    return encode_message(to_message(mesh));
}

MeshMessage decode_message(std::string_view payload)
{
    need(payload, 0, kHeaderSize, "header");
    MeshMessage m;
    m.version = get<std::uint16_t>(payload, 0);
    if (m.version != kVersion)
        throw ParseError(ParseErrorKind::BadVersion, 0, OffsetUnit::Byte,
                         "version " + std::to_string(m.version) + ", expected " + std::to_string(kVersion));
    m.flags = get<std::uint16_t>(payload, 2);
    if ((m.flags & ~kFlagDensities) != 0)
        throw ParseError(ParseErrorKind::BadFlags, 2, OffsetUnit::Byte, "unknown flag bits " + std::to_string(m.flags));
    const std::uint32_t nv = get<std::uint32_t>(payload, 4);
    const std::uint32_t nt = get<std::uint32_t>(payload, 8);

    std::size_t at = kHeaderSize;
    need(payload, at, std::uint64_t{12} * nv, "positions");
    m.positions.resize(nv);
    for (auto& p : m.positions) {
        for (int a = 0; a < 3; ++a, at += 4)
            p[a] = get<float>(payload, at);
    }
    need(payload, at, std::uint64_t{4} * nv, "colors");
    m.colors.resize(nv);
    for (auto& c : m.colors) {
        std::memcpy(c.data(), payload.data() + at, 4);
        at += 4;
    }
    need(payload, at, std::uint64_t{12} * nt, "triangles");
    m.triangles.resize(nt);
    for (auto& t : m.triangles) {
        for (auto& i : t) {
            i = get<std::uint32_t>(payload, at);
            if (i >= nv)
                throw ParseError(ParseErrorKind::IndexOutOfRange, at, OffsetUnit::Byte,
                                 "vertex index " + std::to_string(i) + " >= vertex count " + std::to_string(nv));
            at += 4;
        }
    }
    if (m.has_densities()) {
        need(payload, at, std::uint64_t{4} * nv, "densities");
        m.densities.resize(nv);
        for (auto& d : m.densities) {
            d = get<float>(payload, at);
            at += 4;
        }
    }
    if (at != payload.size())
        throw ParseError(ParseErrorKind::TrailingBytes, at, OffsetUnit::Byte,
                         std::to_string(payload.size() - at) + " bytes after the declared content");
    return m;
}

TriangleMesh decode_mesh(std::string_view payload)
{
    return to_mesh(decode_message(payload));
}

std::string encode_frame(std::string_view payload)
{
    if (payload.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("payload too large for one frame");
    std::string out(kFrameMagic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(payload.size()));
    out.append(payload);
    return out;
}

void FrameReader::feed(std::string_view bytes)
{
    if (start_ > 0 && start_ >= buffer_.size() / 2) {
        buffer_.erase(0, start_);
        start_ = 0;
    }
    buffer_.append(bytes);
}

std::optional<std::string> FrameReader::next()
{
    const std::size_t avail = buffer_.size() - start_;
    const std::size_t check = std::min<std::size_t>(avail, 4);
    if (std::memcmp(buffer_.data() + start_, kFrameMagic, check) != 0)
        throw ParseError(ParseErrorKind::BadMagic, consumed_, OffsetUnit::Byte, "frame does not start with LMRF");
    if (avail < kFrameHeaderSize)
        return std::nullopt;
    const std::uint32_t len = get<std::uint32_t>(buffer_, start_ + 4);
    if (avail - kFrameHeaderSize < len)
        return std::nullopt;
    std::string payload = buffer_.substr(start_ + kFrameHeaderSize, len);
    start_ += kFrameHeaderSize + len;
    consumed_ += kFrameHeaderSize + len;
    return payload;
}

void FrameReader::finish() const
{
    if (pending() == 0)
        return;
    std::string detail = "stream ended " + std::to_string(pending()) + " bytes into a frame";
    if (pending() >= kFrameHeaderSize)
        detail += " of " + std::to_string(get<std::uint32_t>(buffer_, start_ + 4)) + " payload bytes";
    throw ParseError(ParseErrorKind::TruncatedPayload, consumed_, OffsetUnit::Byte, detail);
}

} // namespace limrsf::wire
