#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "limrsf/error.hpp"

namespace limrsf::ply {

enum class Format
{
    Ascii,
    BinaryLittleEndian,
};

enum class Type
{
    Int8,
    UInt8,
    Int16,
    UInt16,
    Int32,
    UInt32,
    Float32,
    Float64,
};

std::size_t type_size(Type t) noexcept;
const char* type_name(Type t) noexcept;

struct Property
{
    std::string name;
    Type type = Type::Float32;
    bool is_list = false;
    Type count_type = Type::UInt8;
};

struct Element
{
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;

    /// Index of a property by name, or -1.
    int find(std::string_view property) const;
};

struct Header
{
    Format format = Format::BinaryLittleEndian;
    std::vector<Element> elements;
    /// Byte offset of the first payload byte.
    std::size_t body_offset = 0;
    /// Number of header lines, so the first payload line is header_lines + 1.
    std::size_t header_lines = 0;
};

/// Parses the header of an in-memory PLY file. Throws ParseError.
Header parse_header(std::string_view data);

/// Sequential reader over the payload. Ascii rows are one line each; every
/// row must hold exactly the tokens its element declares.
class BodyReader
{
public:
    BodyReader(std::string_view data, const Header& header);

    /// Starts a row of `element`; for ascii this tokenizes the next line.
    void begin_row(const Element& element);
    /// Finishes a row; ascii rows with leftover tokens are rejected.
    void end_row();

    double read_scalar(Type t);
    std::size_t read_count(Type t);

    /// Current line (ascii) or byte (binary) position, for error reports.
    std::size_t offset() const noexcept { return format_ == Format::Ascii ? line_ : pos_; }
    OffsetUnit unit() const noexcept { return format_ == Format::Ascii ? OffsetUnit::Line : OffsetUnit::Byte; }

    /// Throws when unread payload remains.
    void finish();

private:
    [[noreturn]] void truncated(std::size_t need) const;
    std::string_view next_token();

    std::string_view data_;
    Format format_;
    std::size_t pos_;
    std::size_t line_;
    std::vector<std::string_view> tokens_;
    std::size_t token_ = 0;
};

/// Appends ascii or little-endian binary values.
class BodyWriter
{
public:
    explicit BodyWriter(Format format) : format_(format) {}

    void write_float(float v);
    void write_uchar(std::uint8_t v);
    void write_int(std::int32_t v);
    void end_row();

    std::string& buffer() { return out_; }

private:
    void separator();

    Format format_;
    std::string out_;
    bool row_started_ = false;
};

std::string format_line(Format format);


} // namespace limrsf::ply
