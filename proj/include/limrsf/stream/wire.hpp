#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf::wire {

inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kFlagDensities = 0x1;
inline constexpr std::size_t kHeaderSize = 12;
inline constexpr char kFrameMagic[4] = {'L', 'M', 'R', 'F'};
inline constexpr std::size_t kFrameHeaderSize = 8;

using Rgba8 = Eigen::Matrix<std::uint8_t, 4, 1>;

/// Decoded snapshot, field for field as on the wire (all little-endian):
/// u16 version, u16 flags, u32 vertex_count, u32 triangle_count,
/// f32 xyz per vertex, u8 rgba per vertex, u32 abc per triangle,
/// then f32 per vertex when flags bit 0 is set.
struct MeshMessage
{
    std::uint16_t version = kVersion;
    std::uint16_t flags = 0;
    std::vector<Eigen::Vector3f> positions;
    std::vector<Rgba8> colors;
    std::vector<Triangle> triangles;
    std::vector<float> densities;

    bool has_densities() const { return (flags & kFlagDensities) != 0; }
    bool operator==(const MeshMessage& o) const = default;
};

/// Positions narrowed to f32, colors round(c * 255). Highlights travel only
/// through the colors. Densities are included when the mesh has them.
MeshMessage to_message(const TriangleMesh& mesh);
/// Colors c / 255; no highlight flags.
TriangleMesh to_mesh(const MeshMessage& message);

/// Throws InvalidArgument when the counts or list lengths are inconsistent.
std::string encode_message(const MeshMessage& message);
std::string encode_mesh(const TriangleMesh& mesh);

/// Strict decode of one payload. ParseError kinds: BadVersion, BadFlags,
/// TruncatedPayload, TrailingBytes, IndexOutOfRange, all with byte offsets.
MeshMessage decode_message(std::string_view payload);
TriangleMesh decode_mesh(std::string_view payload);

/// "LMRF" + u32 payload length + payload.
std::string encode_frame(std::string_view payload);

/// Incremental frame splitter for a byte stream. feed() accepts arbitrary
/// chunks; next() yields complete payloads in order.
class FrameReader
{
public:
    void feed(std::string_view bytes);
    /// Next complete payload, or nullopt if more bytes are needed. Throws
    /// ParseError(BadMagic) with the stream offset of the bad header.
    std::optional<std::string> next();
    /// Bytes of a frame started but not finished.
    std::size_t pending() const { return buffer_.size() - start_; }
    /// Throws ParseError(TruncatedPayload) if the stream ended inside a frame.
    void finish() const;

private:
    std::string buffer_;
    std::size_t start_ = 0;
    std::uint64_t consumed_ = 0;
};

} // namespace limrsf::wire
