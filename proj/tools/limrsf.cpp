// limrsf command line: scan generation, reconstruction, blind-spot detection,
// evaluation and mesh streaming.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "limrsf/blindspot/evaluation.hpp"
#include "limrsf/error.hpp"
#include "limrsf/file_io.hpp"
#include "limrsf/geometry/ply.hpp"
#include "limrsf/image/image.hpp"
#include "limrsf/image/metrics.hpp"
#include "limrsf/pipeline/config.hpp"
#include "limrsf/pipeline/pipeline.hpp"
#include "limrsf/reconstruction/mesh_ply.hpp"
#include "limrsf/stream/server.hpp"

using namespace limrsf;
using Json = nlohmann::ordered_json;

namespace {

enum Exit
{
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kNumeric = 3,
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct PipelineFlags
{
    std::string config;
    std::optional<int> depth;
    std::optional<double> density_radius;
    std::optional<double> density_threshold;
    std::optional<std::size_t> target_vertices;
    std::optional<double> percentile;
    std::optional<double> map_radius;
    std::optional<std::uint16_t> tcp_port;
    std::optional<std::uint16_t> ws_port;
};

void add_config_flag(CLI::App* app, PipelineFlags& f)
{
    app->add_option("--config", f.config, "Config file; flags override its values")->check(CLI::ExistingFile);
}

void add_reconstruction_flags(CLI::App* app, PipelineFlags& f)
{
    app->add_option("--depth", f.depth, "Poisson grid depth (2^depth cells per axis)");
    app->add_option("--density-radius", f.density_radius, "Vertex density radius in meters");
    app->add_option("--density-threshold", f.density_threshold, "Highlight below this fraction of the mean density");
}

void add_eval_flags(CLI::App* app, PipelineFlags& f)
{
    app->add_option("--percentile", f.percentile, "Percentile P of the low-density ground truth");
    app->add_option("--map-radius", f.map_radius, "Radius mapping highlighted vertices onto the cloud");
}

void add_port_flags(CLI::App* app, PipelineFlags& f)
{
    app->add_option("--tcp-port", f.tcp_port, "Raw TCP port (0 picks one)");
    app->add_option("--ws-port", f.ws_port, "WebSocket port (0 picks one)");
}

PipelineConfig resolve(const PipelineFlags& f)
{
    PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
    if (f.depth)
        c.poisson.depth = *f.depth;
    if (f.density_radius)
        c.poisson.density_radius = *f.density_radius;
    if (f.density_threshold)
        c.highlight.density_threshold = *f.density_threshold;
    if (f.target_vertices)
        c.target_vertices = *f.target_vertices;
    if (f.percentile)
        c.eval.percentile = *f.percentile;
    if (f.map_radius)
        c.eval.map_radius = *f.map_radius;
    if (f.tcp_port)
        c.serve.tcp_port = *f.tcp_port;
    if (f.ws_port)
        c.serve.ws_port = *f.ws_port;
    c.validate();
    return c;
}

Json detection_json(const DetectionReport& r)
{
    return Json{{"tp", r.tp},       {"fp", r.fp}, {"fn", r.fn},  {"precision", r.precision},
                {"recall", r.recall}, {"f1", r.f1}, {"iou", r.iou}};
}

void emit_json(const Json& j, const std::string& path)
{
    const std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

void warn(const std::string& message) { std::cerr << "limrsf: warning: " << message << "\n"; }

// --- scan-gen ---

struct ScanGenArgs
{
    std::string out;
    std::uint64_t seed = 1;
    std::optional<double> spacing;
    std::optional<double> noise;
    std::optional<std::size_t> outliers;
    bool no_hole = false;
    bool ascii = false;
};

SceneSpec scene_from(const ScanGenArgs& a)
{
    SceneSpec s = default_scene(a.seed);
    if (a.no_hole)
        s.holes.clear();
    if (a.spacing)
        s.spacing = *a.spacing;
    if (a.noise)
        s.noise_sigma = *a.noise;
    if (a.outliers)
        s.outliers = *a.outliers;
    return s;
}

int scan_gen(const ScanGenArgs& a)
{
    const PointCloud cloud = generate_room_scan(scene_from(a));
    save_point_cloud(cloud, a.out, a.ascii ? ply::Format::Ascii : ply::Format::BinaryLittleEndian);
    std::cout << "wrote " << cloud.size() << " points to " << a.out << "\n";
    return kOk;
}

// --- reconstruct / detect / simplify ---

TriangleMesh detect_on(const TriangleMesh& mesh, const PointCloud& cloud, const PipelineConfig& c,
                       HighlightStats* stats)
{
    return highlight_blind_spots(compute_vertex_densities(mesh, cloud, c.poisson.density_radius), c.highlight, stats);
}

int reconstruct(const std::string& cloud_path, const std::string& out, const PipelineFlags& f)
{
    const PipelineConfig c = resolve(f);
    const PointCloud cloud = remove_statistical_outliers(load_point_cloud(cloud_path), c.outlier).filtered;
    const PointCloud oriented = estimate_normals(cloud, c.normals).cloud;
    TriangleMesh mesh = poisson_reconstruct(oriented, c.poisson);
    if (cloud.has_colors())
        mesh = transfer_colors(mesh, cloud, c.color_neighbors);
    else
        warn("cloud has no colors; mesh keeps its default color");
    HighlightStats stats;
    mesh = detect_on(mesh, cloud, c, &stats);
    save_mesh(mesh, out);
    std::cout << "wrote " << mesh.vertex_count() << " vertices, " << mesh.triangles.size() << " triangles, "
              << stats.highlighted << " highlighted to " << out << "\n";
    return kOk;
}

int detect(const std::string& mesh_path, const std::string& cloud_path, const std::string& out,
           const PipelineFlags& f)
{
    const PipelineConfig c = resolve(f);
    HighlightStats stats;
    const TriangleMesh mesh = detect_on(load_mesh(mesh_path), load_point_cloud(cloud_path), c, &stats);
    save_mesh(mesh, out);
    std::cout << stats.highlighted << " of " << mesh.vertex_count() << " vertices below density "
              << stats.threshold << "\n";
    return kOk;
}

int simplify(const std::string& mesh_path, const std::string& out, const PipelineFlags& f)
{
    const PipelineConfig c = resolve(f);
    const SimplifyResult r = simplify_mesh(load_mesh(mesh_path), c.target_vertices);
    if (r.status == SimplifyStatus::NoOp)
        warn("target " + std::to_string(c.target_vertices) + " is not below the vertex count; mesh unchanged");
    save_mesh(r.mesh, out);
    std::cout << to_string(r.status) << ": " << r.mesh.vertex_count() << " vertices after " << r.collapses
              << " collapses\n";
    return kOk;
}

// --- eval-blindspots ---

struct Counts
{
    std::uint64_t tp = 0, fp = 0, fn = 0;
};

/// "tp fp fn" as whitespace separated integers; `#` comments.
Counts read_counts(const std::string& path)
{
    std::istringstream in(read_file(path));
    std::string line, text;
    while (std::getline(in, line))
        text += line.substr(0, line.find('#')) + " ";
    std::istringstream fields(text);
    Counts c;
    std::string rest;
    if (!(fields >> c.tp >> c.fp >> c.fn) || (fields >> rest))
        throw ParseError(ParseErrorKind::MalformedHeader, 0, OffsetUnit::Byte,
                         path + ": expected three counts 'tp fp fn'");
    return c;
}

struct EvalBlindArgs
{
    std::string cloud, mesh, counts, report;
    std::optional<double> radius;
};

int eval_blindspots(const EvalBlindArgs& a, PipelineFlags f)
{
    DetectionReport r;
    if (!a.counts.empty()) {
        const Counts c = read_counts(a.counts);
        r = detection_metrics(c.tp, c.fp, c.fn);
    } else {
        if (a.cloud.empty() || a.mesh.empty())
            throw InvalidArgument("eval-blindspots needs --counts or both --cloud and --mesh");
        if (a.radius)
            f.density_radius = a.radius;
        const PipelineConfig c = resolve(f);
        const PointCloud cloud = load_point_cloud(a.cloud);
        TriangleMesh mesh = load_mesh(a.mesh);
        if (!mesh.has_highlights())
            mesh = detect_on(mesh, cloud, c, nullptr);
        const MappedSet mapped = map_blind_spots(mesh, cloud, c.eval.map_radius);
        const GroundTruthSet truth =
            identify_low_density(estimate_point_density(cloud, c.poisson.density_radius), c.eval.percentile);
        r = detection_metrics(mapped.indices, truth.indices);
    }
    emit_json(detection_json(r), a.report);
    return kOk;
}

// --- eval-images ---

int eval_images(const std::string& truth, const std::string& render, const std::string& mode,
                const std::string& report)
{
    SsimParams p;
    p.mode = mode == "global" ? SsimMode::Global : SsimMode::Windowed;
    const Image a = load_image(truth), b = load_image(render);
    const double m = mse(a, b);
    const double db = psnr_from_mse(m);
    Json j;
    j["ssim"] = ssim(a, b, p);
    if (std::isinf(db))
        j["psnr"] = "inf";
    else
        j["psnr"] = db;
    j["mse"] = m;
    emit_json(j, report);
    return kOk;
}

// --- serve / fetch ---

struct FileStamp
{
    std::filesystem::file_time_type time{};
    std::uintmax_t size = 0;
    bool operator==(const FileStamp&) const = default;
};

std::optional<FileStamp> stamp(const std::string& path)
{
    std::error_code ec;
    FileStamp s{std::filesystem::last_write_time(path, ec), 0};
    if (ec)
        return std::nullopt;
    s.size = std::filesystem::file_size(path, ec);
    if (ec)
        return std::nullopt;
    return s;
}

void serve_until_interrupted(BroadcastServer& server, const std::string& mesh_path, int poll_ms)
{
    std::optional<FileStamp> seen = stamp(mesh_path);
    while (!g_interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(poll_ms));
        const std::optional<FileStamp> now = stamp(mesh_path);
        if (!now || now == seen)
            continue;
        try {
            const std::uint64_t seq = server.publish(load_mesh(mesh_path));
            seen = now;
            std::cout << "republished " << mesh_path << " as snapshot " << seq << std::endl;
        } catch (const Error& e) {
            warn(std::string("reload failed, retrying: ") + e.what());
        }
    }
}

ServerOptions server_options(const PipelineConfig& c)
{
    ServerOptions o = c.serve;
    o.host = bind_host(o.host);
    return o;
}

int serve(const std::string& mesh_path, int poll_ms, const PipelineFlags& f)
{
    const PipelineConfig c = resolve(f);
    const TriangleMesh mesh = load_mesh(mesh_path);
    BroadcastServer server(server_options(c));
    server.publish(mesh);
    std::cout << "listening tcp=" << server.tcp_port() << " ws=" << server.ws_port() << std::endl;
    serve_until_interrupted(server, mesh_path, poll_ms);
    server.stop();
    return kOk;
}

int fetch(const std::string& address, const std::string& out, int timeout_ms)
{
    const TriangleMesh mesh = fetch_once(address, timeout_ms);
    save_mesh(mesh, out);
    std::cout << "fetched " << mesh.vertex_count() << " vertices, " << mesh.triangles.size() << " triangles\n";
    return kOk;
}

// --- run ---

struct RunArgs
{
    std::string scene;
    std::string cloud;
    std::string out;
    std::uint64_t seed = 1;
    bool serve = false;
    int poll_ms = 500;
};

int run(const RunArgs& a, const PipelineFlags& f)
{
    const PipelineConfig c = resolve(f);
    PipelineInput input;
    if (!a.cloud.empty()) {
        input = a.cloud;
    } else if (a.scene == "default") {
        input = default_scene(a.seed);
    } else {
        throw InvalidArgument("unknown scene '" + a.scene + "' (only 'default' is built in)");
    }
    const PipelineResult r = run_pipeline(input, c, a.out);
    for (const std::string& w : r.warnings)
        warn(w);
    const DetectionReport& d = r.hole_detection ? *r.hole_detection : r.percentile_detection;
    std::cout << "mesh " << r.mesh.vertex_count() << " vertices, " << r.highlight.highlighted << " highlighted; "
              << "simplified to " << r.simplified.mesh.vertex_count() << "\n"
              << "detection (" << (r.hole_detection ? "hole boxes" : "percentile") << "): precision "
              << d.precision << " recall " << d.recall << " f1 " << d.f1 << " iou " << d.iou << "\n"
              << "wrote " << r.mesh_path << ", " << r.simplified_path << ", " << r.report_path << "\n";
    if (a.serve) {
        BroadcastServer server(server_options(c));
        server.publish(r.simplified.mesh);
        std::cout << "listening tcp=" << server.tcp_port() << " ws=" << server.ws_port() << std::endl;
        serve_until_interrupted(server, r.simplified_path, a.poll_ms);
        server.stop();
    }
    return kOk;
}

int exit_code_of(const std::exception_ptr& error)
{
    try {
        std::rethrow_exception(error);
    } catch (const StageError& e) {
        return exit_code_of(e.cause());
    } catch (const InvalidArgument&) {
        return kUsage;
    } catch (const NumericError&) {
        return kNumeric;
    } catch (const std::exception&) {
        return kIo;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Point cloud to highlighted mesh: reconstruction, blind-spot detection and streaming"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "limrsf 1.0");

    PipelineFlags flags;

    ScanGenArgs scan;
    auto* scan_cmd = app.add_subcommand("scan-gen", "Synthesize a room scan with a planted wall hole");
    scan_cmd->add_option("--out", scan.out, "Output point cloud PLY")->required();
    scan_cmd->add_option("--seed", scan.seed, "Random seed");
    scan_cmd->add_option("--spacing", scan.spacing, "Sample spacing in meters");
    scan_cmd->add_option("--noise", scan.noise, "Gaussian position noise sigma in meters");
    scan_cmd->add_option("--outliers", scan.outliers, "Number of far random points");
    scan_cmd->add_flag("--no-hole", scan.no_hole, "Sample the walls without the planted hole");
    scan_cmd->add_flag("--ascii", scan.ascii, "Write ASCII PLY");

    std::string cloud_path, mesh_path, out_path;
    auto* rec_cmd = app.add_subcommand("reconstruct", "Cloud to colored, highlighted mesh");
    rec_cmd->add_option("--cloud", cloud_path, "Input point cloud PLY")->required();
    rec_cmd->add_option("--out", out_path, "Output mesh PLY")->required();
    add_config_flag(rec_cmd, flags);
    add_reconstruction_flags(rec_cmd, flags);

    auto* simp_cmd = app.add_subcommand("simplify", "Quadric edge-collapse simplification");
    simp_cmd->add_option("--mesh", mesh_path, "Input mesh PLY")->required();
    simp_cmd->add_option("--out", out_path, "Output mesh PLY")->required();
    simp_cmd->add_option("--target-vertices", flags.target_vertices, "Vertex budget");
    add_config_flag(simp_cmd, flags);

    auto* det_cmd = app.add_subcommand("detect", "Recompute densities and highlights of a mesh against a cloud");
    det_cmd->add_option("--mesh", mesh_path, "Input mesh PLY")->required();
    det_cmd->add_option("--cloud", cloud_path, "Point cloud PLY")->required();
    det_cmd->add_option("--out", out_path, "Output mesh PLY")->required();
    add_config_flag(det_cmd, flags);
    det_cmd->add_option("--density-radius", flags.density_radius, "Vertex density radius in meters");
    det_cmd->add_option("--density-threshold", flags.density_threshold,
                        "Highlight below this fraction of the mean density");

    EvalBlindArgs eb;
    auto* eb_cmd = app.add_subcommand("eval-blindspots", "Detection metrics against low-density ground truth");
    eb_cmd->add_option("--cloud", eb.cloud, "Point cloud PLY");
    eb_cmd->add_option("--mesh", eb.mesh, "Highlighted mesh PLY");
    eb_cmd->add_option("--radius", eb.radius, "Point density radius in meters");
    eb_cmd->add_option("--counts", eb.counts, "File with 'tp fp fn'; metrics only");
    eb_cmd->add_option("--report", eb.report, "Output JSON (default stdout)");
    add_config_flag(eb_cmd, flags);
    add_eval_flags(eb_cmd, flags);

    std::string truth, render, ssim_mode = "windowed", image_report;
    auto* ei_cmd = app.add_subcommand("eval-images", "SSIM, PSNR and MSE of a rendering against ground truth");
    ei_cmd->add_option("--truth", truth, "Ground-truth PGM/PPM")->required();
    ei_cmd->add_option("--render", render, "Rendered PGM/PPM")->required();
    ei_cmd->add_option("--ssim-mode", ssim_mode, "global or windowed")->check(CLI::IsMember({"global", "windowed"}));
    ei_cmd->add_option("--report", image_report, "Output JSON (default stdout)");

    int poll_ms = 500;
    auto* serve_cmd = app.add_subcommand("serve", "Broadcast a mesh over TCP and WebSocket until interrupted");
    serve_cmd->add_option("--mesh", mesh_path, "Mesh PLY; republished when the file changes")->required();
    serve_cmd->add_option("--poll-ms", poll_ms, "File check interval")->check(CLI::PositiveNumber);
    add_config_flag(serve_cmd, flags);
    add_port_flags(serve_cmd, flags);

    std::string address;
    int timeout_ms = 10000;
    auto* fetch_cmd = app.add_subcommand("fetch", "Read one snapshot from a server");
    fetch_cmd->add_option("--address", address, "host:port of the raw TCP endpoint")->required();
    fetch_cmd->add_option("--out", out_path, "Output mesh PLY")->required();
    fetch_cmd->add_option("--timeout-ms", timeout_ms, "Read timeout")->check(CLI::PositiveNumber);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Full pipeline with report");
    auto* scene_opt = run_cmd->add_option("--scene", run_args.scene, "Built-in scene ('default')");
    auto* cloud_opt = run_cmd->add_option("--cloud", run_args.cloud, "Input point cloud PLY");
    scene_opt->excludes(cloud_opt);
    run_cmd->add_option("--seed", run_args.seed, "Scene seed");
    run_cmd->add_option("--out", run_args.out, "Output directory")->required();
    run_cmd->add_flag("--serve", run_args.serve, "Serve the simplified mesh afterwards");
    run_cmd->add_option("--poll-ms", run_args.poll_ms, "File check interval while serving")->check(CLI::PositiveNumber);
    add_config_flag(run_cmd, flags);
    add_reconstruction_flags(run_cmd, flags);
    run_cmd->add_option("--target-vertices", flags.target_vertices, "Vertex budget of the simplified mesh");
    add_eval_flags(run_cmd, flags);
    add_port_flags(run_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (*scan_cmd)
            return scan_gen(scan);
        if (*rec_cmd)
            return reconstruct(cloud_path, out_path, flags);
        if (*simp_cmd)
            return simplify(mesh_path, out_path, flags);
        if (*det_cmd)
            return detect(mesh_path, cloud_path, out_path, flags);
        if (*eb_cmd)
            return eval_blindspots(eb, flags);
        if (*ei_cmd)
            return eval_images(truth, render, ssim_mode, image_report);
        if (*serve_cmd)
            return serve(mesh_path, poll_ms, flags);
        if (*fetch_cmd)
            return fetch(address, out_path, timeout_ms);
        if (*run_cmd) {
            if (run_args.cloud.empty() && run_args.scene.empty())
                throw InvalidArgument("run needs --scene or --cloud");
            return run(run_args, flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "limrsf: error: " << e.what() << "\n";
        return exit_code_of(std::current_exception());
    }
    return kUsage;
}
