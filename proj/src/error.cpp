#include "limrsf/error.hpp"

namespace limrsf {

const char* to_string(ParseErrorKind kind) noexcept
{
    switch (kind) {
    case ParseErrorKind::MalformedHeader: return "malformed header";
    case ParseErrorKind::TruncatedPayload: return "truncated payload";
    case ParseErrorKind::UnsupportedProperty: return "unsupported property";
    case ParseErrorKind::InconsistentCounts: return "inconsistent counts";
    case ParseErrorKind::BadMagic: return "bad magic";
    case ParseErrorKind::BadMaxval: return "bad maxval";
    case ParseErrorKind::BadVersion: return "bad version";
    case ParseErrorKind::BadFlags: return "bad flags";
    case ParseErrorKind::IndexOutOfRange: return "index out of range";
    case ParseErrorKind::TrailingBytes: return "trailing bytes";
    }
    return "unknown";
}

namespace {

std::string format_parse_error(ParseErrorKind kind, std::size_t offset, OffsetUnit unit,
                               const std::string& detail)
{
    std::string msg = to_string(kind);
    msg += unit == OffsetUnit::Byte ? " at byte " : " at line ";
    msg += std::to_string(offset);
    if (!detail.empty()) {
        msg += ": ";
        msg += detail;
    }
    return msg;
}

} // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, OffsetUnit unit, const std::string& detail)
    : Error(format_parse_error(kind, offset, unit, detail)), kind_(kind), offset_(offset), unit_(unit)
{
}

} // namespace limrsf
