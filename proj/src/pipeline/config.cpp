#include "limrsf/pipeline/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <type_traits>

#include "limrsf/error.hpp"
#include "limrsf/file_io.hpp"

namespace limrsf {
namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value)
{
    throw ParseError(ParseErrorKind::MalformedHeader, 0, OffsetUnit::Line,
                     "bad value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
    text = trim(text);
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        bad_value(key, text);
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v))
            bad_value(key, text);
    }
    return v;
}

std::string format(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string format(std::size_t v) { return std::to_string(v); }
std::string format(int v) { return std::to_string(v); }
std::string format(std::uint16_t v) { return std::to_string(v); }

std::string format(const Point3& p) { return format(p.x()) + ", " + format(p.y()) + ", " + format(p.z()); }

template <typename T>
T parse(std::string_view key, std::string_view text)
{
    return parse_number<T>(key, text);
}

template <>
Point3 parse<Point3>(std::string_view key, std::string_view text)
{
    text = trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']')
        text = text.substr(1, text.size() - 2);
    Point3 p;
    for (int a = 0; a < 3; ++a) {
        const auto comma = text.find(',');
        if ((a < 2) == (comma == std::string_view::npos))
            bad_value(key, text);
        p[a] = parse_number<double>(key, text.substr(0, comma));
        text = a < 2 ? text.substr(comma + 1) : std::string_view{};
    }
    return p;
}

struct Field
{
    const char* key;
    std::string (*get)(const PipelineConfig&);
    void (*set)(PipelineConfig&, std::string_view);
    bool (*equal)(const PipelineConfig&, const PipelineConfig&);
};

#define LIMRSF_FIELD(name, member)                                                                            \
    Field                                                                                                     \
    {                                                                                                         \
        name, [](const PipelineConfig& c) { return format(c.member); },                                      \
            [](PipelineConfig& c, std::string_view v) { c.member = parse<decltype(c.member)>(name, v); },     \
            [](const PipelineConfig& a, const PipelineConfig& b) { return a.member == b.member; }             \
    }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table{
        LIMRSF_FIELD("outlier.k", outlier.k),
        LIMRSF_FIELD("outlier.std_ratio", outlier.std_ratio),
        LIMRSF_FIELD("normals.radius", normals.radius),
        LIMRSF_FIELD("normals.viewpoint", normals.viewpoint),
        LIMRSF_FIELD("normals.min_neighbors", normals.min_neighbors),
        LIMRSF_FIELD("poisson.depth", poisson.depth),
        LIMRSF_FIELD("poisson.smoothing_radius", poisson.smoothing_radius),
        LIMRSF_FIELD("poisson.iso_offset", poisson.iso_offset),
        LIMRSF_FIELD("poisson.crop_margin", poisson.crop_margin),
        LIMRSF_FIELD("colors.k", color_neighbors),
        LIMRSF_FIELD("density.radius", poisson.density_radius),
        LIMRSF_FIELD("highlight.density_threshold", highlight.density_threshold),
        LIMRSF_FIELD("highlight.base_alpha", highlight.base_alpha),
        LIMRSF_FIELD("highlight.highlight_alpha", highlight.highlight_alpha),
        LIMRSF_FIELD("simplify.target_vertices", target_vertices),
        LIMRSF_FIELD("eval.percentile", eval.percentile),
        LIMRSF_FIELD("eval.map_radius", eval.map_radius),
        LIMRSF_FIELD("serve.tcp_port", serve.tcp_port),
        LIMRSF_FIELD("serve.ws_port", serve.ws_port),
    };
    return table;
}

#undef LIMRSF_FIELD

const Field& find_field(std::string_view key)
{
    for (const Field& f : fields()) {
        if (key == f.key)
            return f;
    }
    throw ParseError(ParseErrorKind::UnsupportedProperty, 0, OffsetUnit::Line,
                     "unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const char* key, const char* what)
{
    if (!ok)
        throw InvalidArgument(std::string("config ") + key + " " + what);
}

} // namespace

void PipelineConfig::validate() const
{
    require(outlier.k >= 1, "outlier.k", "must be at least 1");
    require(outlier.std_ratio > 0, "outlier.std_ratio", "must be positive");
    require(normals.radius > 0, "normals.radius", "must be positive");
    require(normals.min_neighbors >= 3, "normals.min_neighbors", "must be at least 3");
    poisson.validate();
    require(color_neighbors >= 1, "colors.k", "must be at least 1");
    highlight.validate();
    require(target_vertices >= 4, "simplify.target_vertices", "must be at least 4");
    require(eval.percentile > 0 && eval.percentile < 100, "eval.percentile", "must lie in (0, 100)");
    require(eval.map_radius > 0, "eval.map_radius", "must be positive");
}

bool PipelineConfig::operator==(const PipelineConfig& o) const
{
    for (const Field& f : fields()) {
        if (!f.equal(*this, o))
            return false;
    }
    return true;
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const Field& f : fields())
        keys.emplace_back(f.key);
    return keys;
}

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value)
{
    find_field(key).set(config, value);
}

std::string get_config_value(const PipelineConfig& config, std::string_view key)
{
    return find_field(key).get(config);
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base)
{
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3)
                    throw ParseError(ParseErrorKind::MalformedHeader, 0, OffsetUnit::Line,
                                     "bad section header '" + std::string(line) + "'");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ParseError(ParseErrorKind::MalformedHeader, 0, OffsetUnit::Line,
                                 "expected 'key = value', got '" + std::string(line) + "'");
            const std::string_view name = trim(line.substr(0, eq));
            const std::string key = section.empty() || name.find('.') != std::string_view::npos
                                        ? std::string(name)
                                        : section + "." + std::string(name);
            set_config_value(base, key, line.substr(eq + 1));
        } catch (const ParseError& e) {
            std::string detail = e.what();
            if (const auto colon = detail.find(": "); colon != std::string::npos)
                detail = detail.substr(colon + 2);
            throw ParseError(e.kind(), line_no, OffsetUnit::Line, detail);
        }
    }
    base.validate();
    return base;
}

std::string emit_config(const PipelineConfig& config)
{
    std::string out;
    std::string section;
    for (const Field& f : fields()) {
        const std::string_view key = f.key;
        const auto dot = key.find('.');
        const std::string s(key.substr(0, dot));
        if (s != section) {
            out += (out.empty() ? "[" : "\n[") + s + "]\n";
            section = s;
        }
        out += std::string(key.substr(dot + 1)) + " = " + f.get(config) + "\n";
    }
    return out;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base)
{
    return parse_config(read_file(path), std::move(base));
}

} // namespace limrsf
