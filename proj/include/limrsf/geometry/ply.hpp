#pragma once

#include <string>
#include <string_view>

#include "limrsf/geometry/ply_format.hpp"
#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

/// Point-cloud PLY subset: a single `vertex` element with float x/y/z, optional
/// uchar red/green/blue and optional float nx/ny/nz. Anything else is rejected.
/// The format (ascii or binary little endian) is taken from the header.
PointCloud parse_point_cloud(std::string_view data);
std::string serialize_point_cloud(const PointCloud& cloud, ply::Format format);

PointCloud load_point_cloud(const std::string& path);
void save_point_cloud(const PointCloud& cloud, const std::string& path,
                      ply::Format format = ply::Format::BinaryLittleEndian);

/// round(c * 255) clamped to [0, 255].
std::uint8_t quantize_channel(double c);

} // namespace limrsf
