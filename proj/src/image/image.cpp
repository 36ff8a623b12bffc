#include "limrsf/image/image.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "limrsf/error.hpp"
#include "limrsf/file_io.hpp"

namespace limrsf {

Image::Image(int w, int h, int c, double fill) : width(w), height(h), channels(c)
{
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
        throw InvalidArgument("image needs positive size and 1 or 3 channels");
    pixels = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(w) * h * c, fill);
}

Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Image::plane() const
{
    if (channels != 1)
        throw InvalidArgument("plane() needs a single-channel image");
    return {pixels.data(), height, width};
}

void Image::validate() const
{
    if (width <= 0 || height <= 0)
        throw InvalidArgument("image dimensions must be positive");
    if (channels != 1 && channels != 3)
        throw InvalidArgument("image must have 1 or 3 channels");
    if (pixels.size() != static_cast<Eigen::Index>(width) * height * channels)
        throw InvalidArgument("pixel count does not match dimensions");
    if ((pixels < 0.0).any() || (pixels > 1.0).any() || !pixels.allFinite())
        throw InvalidArgument("pixel values must lie in [0, 1]");
}

bool Image::operator==(const Image& o) const
{
    return width == o.width && height == o.height && channels == o.channels && pixels.size() == o.pixels.size() &&
           (pixels == o.pixels).all();
}

namespace {

class Cursor
{
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    std::size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= s_.size(); }

    void skip_space_and_comments()
    {
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n')
                    ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    // Returns false at end of input; throws on a non-numeric token.
    bool next_uint(unsigned long& value, ParseErrorKind kind, const char* what)
    {
        skip_space_and_comments();
        if (at_end())
            return false;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || (ptr != last && !std::isspace(static_cast<unsigned char>(*ptr)) && *ptr != '#'))
            throw ParseError(kind, pos_, OffsetUnit::Byte, std::string("bad ") + what);
        pos_ += static_cast<std::size_t>(ptr - first);
        return true;
    }

    unsigned long header_uint(const char* what)
    {
        unsigned long v = 0;
        if (!next_uint(v, ParseErrorKind::MalformedHeader, what))
            throw ParseError(ParseErrorKind::MalformedHeader, pos_, OffsetUnit::Byte, std::string("missing ") + what);
        return v;
    }

    void advance(std::size_t n) { pos_ += n; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

Image parse_netpbm(std::string_view bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '3' && bytes[1] != '5' && bytes[1] != '6'))
        throw ParseError(ParseErrorKind::BadMagic, 0, OffsetUnit::Byte, "expected P2, P3, P5 or P6");
    const bool binary = bytes[1] == '5' || bytes[1] == '6';
    const int channels = (bytes[1] == '3' || bytes[1] == '6') ? 3 : 1;

    Cursor cur(bytes);
    cur.advance(2);
    const unsigned long w = cur.header_uint("width");
    const unsigned long h = cur.header_uint("height");
    const std::size_t maxval_at = cur.pos();
    const unsigned long maxval = cur.header_uint("maxval");
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
        throw ParseError(ParseErrorKind::MalformedHeader, maxval_at, OffsetUnit::Byte, "image dimensions out of range");
    if (maxval != 255)
        throw ParseError(ParseErrorKind::BadMaxval, maxval_at, OffsetUnit::Byte,
                         "maxval " + std::to_string(maxval) + ", only 255 is supported");

    Image img(static_cast<int>(w), static_cast<int>(h), channels);
    const auto count = static_cast<std::size_t>(img.pixels.size());
    if (binary) {
        if (cur.at_end() || !std::isspace(static_cast<unsigned char>(bytes[cur.pos()])))
            throw ParseError(ParseErrorKind::MalformedHeader, cur.pos(), OffsetUnit::Byte,
                             "expected whitespace after maxval");
        cur.advance(1);
        const std::size_t body = cur.pos();
        const std::size_t available = bytes.size() - body;
        if (available < count)
            throw ParseError(ParseErrorKind::TruncatedPayload, body, OffsetUnit::Byte,
                             "expected " + std::to_string(count) + " bytes, got " + std::to_string(available));
        if (available > count)
            throw ParseError(ParseErrorKind::TrailingBytes, body + count, OffsetUnit::Byte,
                             std::to_string(available - count) + " bytes after the image");
        for (std::size_t i = 0; i < count; ++i)
            img.pixels[static_cast<Eigen::Index>(i)] = static_cast<unsigned char>(bytes[body + i]) / 255.0;
        return img;
    }

    for (std::size_t i = 0; i < count; ++i) {
        unsigned long v = 0;
        const std::size_t at = cur.pos();
        if (!cur.next_uint(v, ParseErrorKind::MalformedHeader, "sample"))
            throw ParseError(ParseErrorKind::TruncatedPayload, at, OffsetUnit::Byte,
                             "expected " + std::to_string(count) + " samples, got " + std::to_string(i));
        if (v > 255)
            throw ParseError(ParseErrorKind::BadMaxval, at, OffsetUnit::Byte, "sample exceeds maxval");
        img.pixels[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / 255.0;
    }
    cur.skip_space_and_comments();
    if (!cur.at_end())
        throw ParseError(ParseErrorKind::TrailingBytes, cur.pos(), OffsetUnit::Byte, "data after the last sample");
    return img;
}

std::string serialize_netpbm(const Image& image, NetpbmEncoding encoding)
{
    image.validate();
    const bool binary = encoding == NetpbmEncoding::Binary;
    const char* magic = image.channels == 1 ? (binary ? "P5" : "P2") : (binary ? "P6" : "P3");
    std::string out = std::string(magic) + "\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    const Eigen::Index row = static_cast<Eigen::Index>(image.width) * image.channels;
    for (Eigen::Index i = 0; i < image.pixels.size(); ++i) {
        const auto v = static_cast<int>(std::lround(image.pixels[i] * 255.0));
        if (binary) {
            out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
        } else {
            out += std::to_string(v);
            out.push_back((i + 1) % row == 0 ? '\n' : ' ');
        }
    }
    return out;
}

Image load_image(const std::string& path)
{
    return parse_netpbm(read_file(path));
}

void save_image(const Image& image, const std::string& path, NetpbmEncoding encoding)
{
    write_file(path, serialize_netpbm(image, encoding));
}

Image to_gray(const Image& image)
{
    if (image.channels == 1)
        return image;
    Image gray(image.width, image.height, 1);
    const Eigen::Index n = gray.pixels.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* p = image.pixels.data() + 3 * i;
        gray.pixels[i] = std::clamp(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2], 0.0, 1.0);
    }
    return gray;
}

} // namespace limrsf
