#include "limrsf/geometry/ply_format.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <iterator>

#include "limrsf/error.hpp"

namespace limrsf::ply {

namespace {

[[noreturn]] void header_error(ParseErrorKind kind, std::size_t line, const std::string& detail)
{
    throw ParseError(kind, line, OffsetUnit::Line, detail);
}

bool parse_type(std::string_view s, Type& t)
{
    struct Entry
    {
        std::string_view a, b;
        Type t;
    };
    static constexpr Entry table[] = {
        {"char", "int8", Type::Int8},       {"uchar", "uint8", Type::UInt8},
        {"short", "int16", Type::Int16},    {"ushort", "uint16", Type::UInt16},
        {"int", "int32", Type::Int32},      {"uint", "uint32", Type::UInt32},
        {"float", "float32", Type::Float32}, {"double", "float64", Type::Float64},
    };
    for (const auto& e : table) {
        if (s == e.a || s == e.b) {
            t = e.t;
            return true;
        }
    }
    return false;
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <typename U>
U load_le(const char* p)
{
    U v;
    std::memcpy(&v, p, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) {
        U r = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            r = static_cast<U>((r << 8) | static_cast<unsigned char>(p[sizeof(U) - 1 - i]));
        v = r;
    }
    return v;
}

template <typename U>
void store_le(std::string& out, U v)
{
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i)
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.append(bytes, sizeof(U));
}

} // namespace

std::size_t type_size(Type t) noexcept
{
    switch (t) {
    case Type::Int8:
    case Type::UInt8: return 1;
    case Type::Int16:
    case Type::UInt16: return 2;
    case Type::Int32:
    case Type::UInt32:
    case Type::Float32: return 4;
    case Type::Float64: return 8;
    }
    return 0;
}

const char* type_name(Type t) noexcept
{
    switch (t) {
    case Type::Int8: return "char";
    case Type::UInt8: return "uchar";
    case Type::Int16: return "short";
    case Type::UInt16: return "ushort";
    case Type::Int32: return "int";
    case Type::UInt32: return "uint";
    case Type::Float32: return "float";
    case Type::Float64: return "double";
    }
    return "?";
}

int Element::find(std::string_view property) const
{
    for (std::size_t i = 0; i < properties.size(); ++i) {
        if (properties[i].name == property)
            return static_cast<int>(i);
    }
    return -1;
}

Header parse_header(std::string_view data)
{
    Header header;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool have_format = false;
    bool done = false;
    while (!done) {
        if (pos >= data.size())
            header_error(ParseErrorKind::MalformedHeader, line_no + 1, "missing end_header");
        const std::size_t eol = data.find('\n', pos);
        if (eol == std::string_view::npos)
            header_error(ParseErrorKind::MalformedHeader, line_no + 1, "unterminated header line");
        std::string_view line = data.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        const auto tok = split_ws(line);

        if (line_no == 1) {
            if (tok.size() != 1 || tok[0] != "ply")
                header_error(ParseErrorKind::MalformedHeader, line_no, "expected 'ply'");
            continue;
        }
        if (tok.empty())
            header_error(ParseErrorKind::MalformedHeader, line_no, "empty header line");
        const std::string_view key = tok[0];
        if (key == "comment" || key == "obj_info")
            continue;
        if (key == "format") {
            if (tok.size() != 3 || tok[2] != "1.0")
                header_error(ParseErrorKind::MalformedHeader, line_no, "bad format line");
            if (tok[1] == "ascii")
                header.format = Format::Ascii;
            else if (tok[1] == "binary_little_endian")
                header.format = Format::BinaryLittleEndian;
            else
                header_error(ParseErrorKind::MalformedHeader, line_no,
                             "unsupported format '" + std::string(tok[1]) + "'");
            have_format = true;
        } else if (key == "element") {
            if (tok.size() != 3)
                header_error(ParseErrorKind::MalformedHeader, line_no, "bad element line");
            Element e;
            e.name = std::string(tok[1]);
            const auto* first = tok[2].data();
            const auto* last = first + tok[2].size();
            auto [p, ec] = std::from_chars(first, last, e.count);
            if (ec != std::errc() || p != last)
                header_error(ParseErrorKind::MalformedHeader, line_no, "bad element count");
            header.elements.push_back(std::move(e));
        } else if (key == "property") {
            if (header.elements.empty())
                header_error(ParseErrorKind::MalformedHeader, line_no, "property before element");
            Property prop;
            if (tok.size() == 5 && tok[1] == "list") {
                prop.is_list = true;
                if (!parse_type(tok[2], prop.count_type) || !parse_type(tok[3], prop.type))
                    header_error(ParseErrorKind::UnsupportedProperty, line_no,
                                 "unknown list type in '" + std::string(line) + "'");
                prop.name = std::string(tok[4]);
            } else if (tok.size() == 3) {
                if (!parse_type(tok[1], prop.type))
                    header_error(ParseErrorKind::UnsupportedProperty, line_no,
                                 "unknown type '" + std::string(tok[1]) + "'");
                prop.name = std::string(tok[2]);
            } else {
                header_error(ParseErrorKind::MalformedHeader, line_no, "bad property line");
            }
            header.elements.back().properties.push_back(std::move(prop));
        } else if (key == "end_header") {
            done = true;
        } else {
            header_error(ParseErrorKind::MalformedHeader, line_no, "unknown keyword '" + std::string(key) + "'");
        }
    }
    if (!have_format)
        header_error(ParseErrorKind::MalformedHeader, line_no, "missing format line");
    header.body_offset = pos;
    header.header_lines = line_no;
    return header;
}

BodyReader::BodyReader(std::string_view data, const Header& header)
    : data_(data), format_(header.format), pos_(header.body_offset), line_(header.header_lines)
{
}

void BodyReader::truncated(std::size_t need) const
{
    throw ParseError(ParseErrorKind::TruncatedPayload, pos_, OffsetUnit::Byte,
                     "need " + std::to_string(need) + " bytes, " + std::to_string(data_.size() - pos_) +
                         " available");
}

void BodyReader::begin_row(const Element& element)
{
    if (format_ != Format::Ascii)
        return;
    tokens_.clear();
    token_ = 0;
    // Skip blank lines between rows.
    while (true) {
        if (pos_ >= data_.size())
            throw ParseError(ParseErrorKind::TruncatedPayload, line_ + 1, OffsetUnit::Line,
                             "expected a '" + element.name + "' row");
        std::size_t eol = data_.find('\n', pos_);
        if (eol == std::string_view::npos)
            eol = data_.size();
        const std::string_view line = data_.substr(pos_, eol - pos_);
        pos_ = eol < data_.size() ? eol + 1 : eol;
        ++line_;
        tokens_ = split_ws(line);
        if (!tokens_.empty())
            break;
    }
}

void BodyReader::end_row()
{
    if (format_ == Format::Ascii && token_ != tokens_.size())
        throw ParseError(ParseErrorKind::InconsistentCounts, line_, OffsetUnit::Line,
                         "row has " + std::to_string(tokens_.size()) + " values, expected " +
                             std::to_string(token_));
}

std::string_view BodyReader::next_token()
{
    if (token_ >= tokens_.size())
        throw ParseError(ParseErrorKind::InconsistentCounts, line_, OffsetUnit::Line,
                         "row has only " + std::to_string(tokens_.size()) + " values");
    return tokens_[token_++];
}

double BodyReader::read_scalar(Type t)
{
    if (format_ == Format::Ascii) {
        const std::string_view tok = next_token();
        const char* first = tok.data();
        const char* last = first + tok.size();
        std::from_chars_result res;
        double value = 0.0;
        if (t == Type::Float32) {
            float f = 0.0f;
            res = std::from_chars(first, last, f);
            value = f;
        } else if (t == Type::Float64) {
            res = std::from_chars(first, last, value);
        } else {
            long long i = 0;
            res = std::from_chars(first, last, i);
            value = static_cast<double>(i);
        }
        if (res.ec != std::errc() || res.ptr != last)
            throw ParseError(ParseErrorKind::InconsistentCounts, line_, OffsetUnit::Line,
                             "bad number '" + std::string(tok) + "'");
        return value;
    }
    const std::size_t n = type_size(t);
    if (data_.size() - pos_ < n)
        truncated(n);
    const char* p = data_.data() + pos_;
    pos_ += n;
    switch (t) {
    case Type::Int8: return static_cast<std::int8_t>(p[0]);
    case Type::UInt8: return static_cast<std::uint8_t>(p[0]);
    case Type::Int16: return static_cast<std::int16_t>(load_le<std::uint16_t>(p));
    case Type::UInt16: return load_le<std::uint16_t>(p);
    case Type::Int32: return static_cast<std::int32_t>(load_le<std::uint32_t>(p));
    case Type::UInt32: return load_le<std::uint32_t>(p);
    case Type::Float32: return std::bit_cast<float>(load_le<std::uint32_t>(p));
    case Type::Float64: return std::bit_cast<double>(load_le<std::uint64_t>(p));
    }
    return 0.0;
}

std::size_t BodyReader::read_count(Type t)
{
    const double v = read_scalar(t);
    if (v < 0.0)
        throw ParseError(ParseErrorKind::InconsistentCounts,
                         format_ == Format::Ascii ? line_ : pos_,
                         format_ == Format::Ascii ? OffsetUnit::Line : OffsetUnit::Byte, "negative list count");
    return static_cast<std::size_t>(v);
}

void BodyReader::finish()
{
    if (format_ == Format::Ascii) {
        std::size_t line = line_;
        std::size_t pos = pos_;
        while (pos < data_.size()) {
            std::size_t eol = data_.find('\n', pos);
            if (eol == std::string_view::npos)
                eol = data_.size();
            ++line;
            if (!split_ws(data_.substr(pos, eol - pos)).empty())
                throw ParseError(ParseErrorKind::InconsistentCounts, line, OffsetUnit::Line,
                                 "data beyond declared element counts");
            pos = eol + 1;
        }
        return;
    }
    if (pos_ != data_.size())
        throw ParseError(ParseErrorKind::InconsistentCounts, pos_, OffsetUnit::Byte,
                         std::to_string(data_.size() - pos_) + " bytes beyond declared element counts");
}

void BodyWriter::separator()
{
    if (format_ == Format::Ascii && row_started_)
        out_.push_back(' ');
    row_started_ = true;
}

void BodyWriter::write_float(float v)
{
    separator();
    if (format_ == Format::Ascii) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out_.append(buf, res.ptr);
    } else {
        store_le(out_, std::bit_cast<std::uint32_t>(v));
    }
}

void BodyWriter::write_uchar(std::uint8_t v)
{
    separator();
    if (format_ == Format::Ascii)
        out_ += std::to_string(v);
    else
        out_.push_back(static_cast<char>(v));
}

void BodyWriter::write_int(std::int32_t v)
{
    separator();
    if (format_ == Format::Ascii)
        out_ += std::to_string(v);
    else
        store_le(out_, static_cast<std::uint32_t>(v));
}

void BodyWriter::end_row()
{
    if (format_ == Format::Ascii)
        out_.push_back('\n');
    row_started_ = false;
}

std::string format_line(Format format)
{
    return format == Format::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
}

} // namespace limrsf::ply
