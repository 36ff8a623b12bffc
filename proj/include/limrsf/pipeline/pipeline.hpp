#pragma once

#include <exception>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "limrsf/blindspot/evaluation.hpp"
#include "limrsf/error.hpp"
#include "limrsf/pipeline/config.hpp"
#include "limrsf/pipeline/scene.hpp"
#include "limrsf/reconstruction/simplify.hpp"

namespace limrsf {

/// A stage failed. what() is "<stage>: <cause>"; cause() rethrows the original.
class StageError : public Error
{
public:
    StageError(std::string stage, std::exception_ptr cause, const std::string& message);

    const std::string& stage() const noexcept { return stage_; }
    const std::exception_ptr& cause() const noexcept { return cause_; }

private:
    std::string stage_;
    std::exception_ptr cause_;
};

struct StageTiming
{
    std::string stage;
    double ms = 0.0;
};

/// A point cloud PLY path or a synthetic scene.
using PipelineInput = std::variant<std::string, SceneSpec>;

struct PipelineResult
{
    std::string mesh_path;
    std::string simplified_path;
    std::string report_path;

    std::size_t input_points = 0;
    std::size_t removed_outliers = 0;
    std::size_t degenerate_normals = 0;
    HighlightStats highlight;
    TriangleMesh mesh;
    SimplifyResult simplified;

    /// Against the points near the planted hole boxes; scene input only.
    std::optional<DetectionReport> hole_detection;
    /// Against the low-density points of the filtered cloud.
    DetectionReport percentile_detection;
    double percentile_threshold = 0.0;

    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
};

/// Outlier removal, normals, Poisson, color transfer, vertex densities,
/// highlighting, evaluation and simplification. Writes mesh.ply,
/// simplified.ply and report.json into `out_dir`, creating it if needed.
/// Evaluation indexes the outlier-filtered cloud. Throws StageError.
PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config, const std::string& out_dir);

/// report.json contents. Numbers print in shortest round-trip form.
std::string report_json(const PipelineResult& result, const PipelineConfig& config);

} // namespace limrsf
