#include "limrsf/pipeline/pipeline.hpp"

#include <chrono>
#include <filesystem>

#include <json.hpp>

#include "limrsf/file_io.hpp"
#include "limrsf/geometry/ply.hpp"
#include "limrsf/reconstruction/mesh_ply.hpp"

namespace limrsf {
namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

template <typename F>
auto run_stage(const char* name, PipelineResult& result, F&& body)
{
    const auto start = Clock::now();
    try {
        auto value = body();
        result.timings.push_back({name, std::chrono::duration<double, std::milli>(Clock::now() - start).count()});
        return value;
    } catch (const std::exception& e) {
        throw StageError(name, std::current_exception(), std::string(name) + ": " + e.what());
    }
}

Json detection_json(const DetectionReport& r)
{
    return Json{{"tp", r.tp},       {"fp", r.fp}, {"fn", r.fn},  {"precision", r.precision},
                {"recall", r.recall}, {"f1", r.f1}, {"iou", r.iou}};
}

} // namespace

StageError::StageError(std::string stage, std::exception_ptr cause, const std::string& message)
    : Error(message), stage_(std::move(stage)), cause_(std::move(cause))
{
}

PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config, const std::string& out_dir)
{
    PipelineResult r;
    run_stage("config", r, [&] {
        config.validate();
        return 0;
    });

    const SceneSpec* scene = std::get_if<SceneSpec>(&input);
    const PointCloud raw = run_stage("load", r, [&] {
        return scene ? generate_room_scan(*scene) : load_point_cloud(std::get<std::string>(input));
    });
    r.input_points = raw.size();

    const PointCloud filtered = run_stage("outliers", r, [&] {
        OutlierResult o = remove_statistical_outliers(raw, config.outlier);
        r.removed_outliers = o.removed.size();
        return std::move(o.filtered);
    });

    const PointCloud oriented = run_stage("normals", r, [&] {
        NormalEstimate n = estimate_normals(filtered, config.normals);
        r.degenerate_normals = n.degenerate.size();
        return std::move(n.cloud);
    });

    TriangleMesh mesh = run_stage("poisson", r, [&] { return poisson_reconstruct(oriented, config.poisson); });

    mesh = run_stage("colors", r, [&] {
        if (!filtered.has_colors()) {
            r.warnings.push_back("input cloud has no colors; mesh keeps its default color");
            return std::move(mesh);
        }
        return transfer_colors(mesh, filtered, config.color_neighbors);
    });

    mesh = run_stage("densities", r, [&] {
        return compute_vertex_densities(mesh, filtered, config.poisson.density_radius);
    });

    r.mesh = run_stage("highlight", r, [&] { return highlight_blind_spots(mesh, config.highlight, &r.highlight); });

    run_stage("evaluate", r, [&] {
        const MappedSet mapped = map_blind_spots(r.mesh, filtered, config.eval.map_radius);
        const GroundTruthSet low =
            identify_low_density(estimate_point_density(filtered, config.poisson.density_radius), config.eval.percentile);
        r.percentile_detection = detection_metrics(mapped.indices, low.indices);
        r.percentile_threshold = low.threshold;
        if (scene) {
            std::vector<std::pair<Point3, Point3>> boxes;
            for (const Box& b : scene->holes)
                boxes.emplace_back(b.lo, b.hi);
            r.hole_detection =
                detection_metrics(mapped.indices, points_near_boxes(filtered, boxes, config.eval.map_radius));
        }
        return 0;
    });

    r.simplified = run_stage("simplify", r, [&] {
        SimplifyResult s = simplify_mesh(r.mesh, config.target_vertices);
        if (s.status == SimplifyStatus::NoOp)
            r.warnings.push_back("simplification target " + std::to_string(config.target_vertices) +
                                 " is not below the mesh vertex count " + std::to_string(r.mesh.vertex_count()) +
                                 "; mesh left unchanged");
        return s;
    });

    namespace fs = std::filesystem;
    r.mesh_path = (fs::path(out_dir) / "mesh.ply").string();
    r.simplified_path = (fs::path(out_dir) / "simplified.ply").string();
    r.report_path = (fs::path(out_dir) / "report.json").string();
    run_stage("write", r, [&] {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec)
            throw IoError("cannot create directory " + out_dir + ": " + ec.message());
        save_mesh(r.mesh, r.mesh_path);
        save_mesh(r.simplified.mesh, r.simplified_path);
        return 0;
    });
    run_stage("report", r, [&] {
        write_file(r.report_path, report_json(r, config));
        return 0;
    });
    return r;
}

std::string report_json(const PipelineResult& r, const PipelineConfig& config)
{
    Json j;
    j["schema"] = 1;
    j["input"] = {{"points", r.input_points},
                  {"removed_outliers", r.removed_outliers},
                  {"degenerate_normals", r.degenerate_normals}};
    j["mesh"] = {{"vertices", r.mesh.vertex_count()},
                 {"triangles", r.mesh.triangles.size()},
                 {"highlighted", r.highlight.highlighted},
                 {"mean_density", r.highlight.mean_density},
                 {"density_threshold", r.highlight.threshold}};
    j["simplified"] = {{"vertices", r.simplified.mesh.vertex_count()},
                       {"triangles", r.simplified.mesh.triangles.size()},
                       {"target", config.target_vertices},
                       {"status", to_string(r.simplified.status)}};
    j["ground_truth"] = r.hole_detection ? "hole_boxes" : "percentile";
    j["detection"] = detection_json(r.hole_detection ? *r.hole_detection : r.percentile_detection);
    j["detection_percentile"] = detection_json(r.percentile_detection);
    j["detection_percentile"]["threshold"] = r.percentile_threshold;
    j["warnings"] = r.warnings;
    Json timings = Json::object();
    for (const StageTiming& t : r.timings)
        timings[t.stage] = t.ms;
    j["timings"] = timings;
    return j.dump(2) + "\n";
}

} // namespace limrsf
