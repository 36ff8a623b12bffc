#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace limrsf {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// Filesystem or socket failure.
class IoError : public Error
{
public:
    using Error::Error;
};

/// A numerical routine failed (e.g. an iterative solve that did not converge).
class NumericError : public Error
{
public:
    using Error::Error;
};

enum class ParseErrorKind
{
    MalformedHeader,
    TruncatedPayload,
    UnsupportedProperty,
    InconsistentCounts,
    BadMagic,
    BadMaxval,
    BadVersion,
    BadFlags,
    IndexOutOfRange,
    TrailingBytes,
};

const char* to_string(ParseErrorKind kind) noexcept;

/// Whether ParseError::offset() counts bytes or (1-based) text lines.
enum class OffsetUnit
{
    Byte,
    Line,
};

class ParseError : public Error
{
public:
    ParseError(ParseErrorKind kind, std::size_t offset, OffsetUnit unit, const std::string& detail);

    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }
    OffsetUnit unit() const noexcept { return unit_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
    OffsetUnit unit_;
};

} // namespace limrsf
