#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "limrsf/geometry/normals.hpp"
#include "limrsf/geometry/outliers.hpp"
#include "limrsf/reconstruction/blind_spots.hpp"
#include "limrsf/reconstruction/poisson.hpp"
#include "limrsf/stream/server.hpp"

namespace limrsf {

struct EvalParams
{
    double percentile = 60.0;
    double map_radius = 0.5;
};

/// Every tunable of the pipeline. Text form is one `key = value` per line,
/// grouped under `[section]` headers or written with dotted keys:
///
///     [outlier]
///     k = 20
///     normals.viewpoint = 0, 0, 0
///
/// `#` starts a comment. Unknown keys are errors.
struct PipelineConfig
{
    OutlierParams outlier;
    NormalParams normals;
    /// `density.radius` maps to poisson.density_radius.
    ReconstructionParams poisson;
    std::size_t color_neighbors = 8;
    HighlightParams highlight;
    std::size_t target_vertices = 10000;
    EvalParams eval;
    ServerOptions serve;

    /// Throws InvalidArgument naming the first out-of-range key.
    void validate() const;
    bool operator==(const PipelineConfig& o) const;
};

/// Dotted names of every key, in emission order.
std::vector<std::string> config_keys();

/// Sets one dotted key from its text value. ParseError(UnsupportedProperty)
/// for an unknown key, ParseError(MalformedHeader) for an unreadable value.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const PipelineConfig& config, std::string_view key);

/// Applies the lines of `text` on top of `base` and validates the result.
/// Parse errors carry 1-based line offsets.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
std::string emit_config(const PipelineConfig& config);

PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

} // namespace limrsf
