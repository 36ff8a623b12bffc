#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace limrsf {

/// Row-major interleaved pixels in [0, 1]; channels is 1 (gray) or 3 (RGB).
struct Image
{
    int width = 0;
    int height = 0;
    int channels = 1;
    Eigen::ArrayXd pixels;

    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);

    double& at(int x, int y, int c = 0) { return pixels[(static_cast<Eigen::Index>(y) * width + x) * channels + c]; }
    double at(int x, int y, int c = 0) const
    {
        return pixels[(static_cast<Eigen::Index>(y) * width + x) * channels + c];
    }
    /// Single-channel image as a height x width array. Requires channels == 1.
    Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> plane() const;

    /// Throws InvalidArgument on bad dimensions, channel count, pixel count or
    /// values outside [0, 1].
    void validate() const;
    bool operator==(const Image& o) const;
};

enum class NetpbmEncoding
{
    Ascii,
    Binary,
};

/// P2/P5 (gray) or P3/P6 (RGB) with maxval 255; samples are divided by 255.
Image parse_netpbm(std::string_view bytes);
/// P5/P6 or P2/P3 depending on channels and encoding; values round(v * 255).
std::string serialize_netpbm(const Image& image, NetpbmEncoding encoding = NetpbmEncoding::Binary);

Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path, NetpbmEncoding encoding = NetpbmEncoding::Binary);

/// Rec. 601 luma 0.299 R + 0.587 G + 0.114 B; gray input is returned unchanged.
Image to_gray(const Image& image);

} // namespace limrsf
