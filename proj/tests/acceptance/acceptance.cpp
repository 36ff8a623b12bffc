// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "limrsf/blindspot/evaluation.hpp"
#include "limrsf/file_io.hpp"
#include "limrsf/geometry/spatial_index.hpp"
#include "limrsf/image/metrics.hpp"
#include "limrsf/pipeline/pipeline.hpp"
#include "limrsf/reconstruction/poisson.hpp"
#include "limrsf/reconstruction/simplify.hpp"
#include "limrsf/stream/server.hpp"
#include "limrsf/stream/wire.hpp"
#include "oracles.hpp"
#include "stream_client.hpp"

using namespace limrsf;
namespace fs = std::filesystem;

namespace {

struct Verdict
{
    bool ok = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

const fs::path& work_dir()
{
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "limrsf_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Table metrics

Verdict table_metrics()
{
    const DetectionReport r = detection_metrics(1333390, 701158, 152182);
    const bool ok = std::abs(r.iou - 0.6098) <= 5e-5 && std::abs(r.precision - 0.6554) <= 5e-5 &&
                    std::abs(r.recall - 0.8976) <= 5e-5 && std::abs(r.f1 - 0.7576) <= 5e-5;
    return {ok, "IoU " + fmt("%.4f", r.iou) + " P " + fmt("%.4f", r.precision) + " R " + fmt("%.4f", r.recall) +
                    " F1 " + fmt("%.4f", r.f1)};
}

// PSNR from MSE

Verdict psnr_rows()
{
    const double wall3 = psnr_from_mse(0.0389), wall2 = psnr_from_mse(0.0997);
    return {std::abs(wall3 - 14.10) <= 0.01 && std::abs(wall2 - 10.01) <= 0.01,
            "MSE 0.0389 -> " + fmt("%.4f", wall3) + " dB, MSE 0.0997 -> " + fmt("%.4f", wall2) + " dB"};
}

// Sphere

Verdict sphere()
{
    PointCloud c;
    c.points = oracle::fibonacci_sphere(2000);
    c.normals = c.points;
    ReconstructionParams p;
    p.depth = 6;
    const TriangleMesh m = poisson_reconstruct(c, p);
    const MeshCounts counts = count_elements(m);
    double sq = 0.0;
    for (const Point3& v : m.vertices)
        sq += (v.norm() - 1.0) * (v.norm() - 1.0);
    const double rms = std::sqrt(sq / static_cast<double>(std::max<std::size_t>(1, m.vertex_count())));
    const bool ok = counts.euler_characteristic() == 2 && counts.non_manifold_or_boundary_edges == 0 && rms < 0.05;
    return {ok, "V-E+F " + std::to_string(counts.euler_characteristic()) + ", open edges " +
                    std::to_string(counts.non_manifold_or_boundary_edges) + ", RMS radial error " +
                    fmt("%.2f%%", 100 * rms)};
}

// Planted hole

fs::path seed_dir(const std::string& tag, std::uint64_t seed)
{
    return work_dir() / (tag + "_seed" + std::to_string(seed));
}

Verdict planted_hole()
{
    double sum = 0.0, slowest = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto start = Clock::now();
        const PipelineResult r = run_pipeline(default_scene(seed), PipelineConfig{}, seed_dir("hole", seed).string());
        slowest = std::max(slowest, std::chrono::duration<double>(Clock::now() - start).count());
        sum += r.hole_detection->f1;
        per_seed += (seed > 1 ? " " : "") + fmt("%.3f", r.hole_detection->f1);
    }
    const double mean = sum / 5;
    return {mean >= 0.6 && slowest < 60.0,
            "mean F1 " + fmt("%.3f", mean) + " (" + per_seed + "), slowest seed " + fmt("%.1f s", slowest)};
}

// Simplification

double mean_distance(const TriangleMesh& from, const TriangleMesh& to)
{
    double sum = 0.0;
    for (const Point3& p : from.vertices) {
        double best = std::numeric_limits<double>::infinity();
        for (const Triangle& t : to.triangles)
            best = std::min(best, oracle::point_triangle_distance(p, to.vertices[t[0]], to.vertices[t[1]],
                                                                  to.vertices[t[2]]));
        sum += best;
    }
    return sum / static_cast<double>(from.vertices.size());
}

Verdict simplification()
{
    auto [v, f] = oracle::icosphere(5);
    TriangleMesh ico;
    ico.vertices = v;
    ico.triangles = f;
    ico.vertex_colors.assign(v.size(), Rgba(0.8, 0.8, 0.8, 0.5));
    std::mt19937_64 rng(7);
    std::bernoulli_distribution pick(0.03);
    ico.highlight.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        ico.highlight[i] = v[i].z() > 0.85 || pick(rng);

    const SimplifyResult r = simplify_mesh(ico, 1000);
    const double d = 0.5 * (mean_distance(ico, r.mesh) + mean_distance(r.mesh, ico));
    std::size_t kept = 0, highlighted = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (ico.highlight[i]) {
            ++highlighted;
            kept += r.mesh.highlight[r.ancestry[i]] != 0;
        }
    }
    const bool ok = v.size() == 10242 && r.mesh.vertex_count() == 1000 && d < 0.02 && kept == highlighted;
    return {ok, std::to_string(v.size()) + " -> " + std::to_string(r.mesh.vertex_count()) +
                    " vertices, mean symmetric distance " + fmt("%.3f%%", 100 * d) + " of radius, ancestry " +
                    std::to_string(kept) + "/" + std::to_string(highlighted)};
}

// Oracle equivalence

Verdict oracle_suite()
{
    std::mt19937_64 rng(2024);
    int knn_ok = 0, radius_ok = 0, density_ok = 0, mapping_ok = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 50 + rng() % 400;
        auto pts = oracle::random_points(rng, n);
        // Duplicates and exact ties exercise the ordering rules.
        for (std::size_t i = 0; i < n / 20; ++i)
            pts[rng() % n] = pts[rng() % n];
        const SpatialIndex index(pts);
        const Point3 q = oracle::random_points(rng, 1)[0];
        const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 30);
        std::vector<std::size_t> got;
        for (const Neighbor& nb : index.knn(q, k))
            got.push_back(nb.index);
        knn_ok += got == oracle::knn(pts, q, k);

        const double r = 0.05 + 0.3 * std::uniform_real_distribution<double>()(rng);
        auto ball = index.radius_search(q, r);
        std::sort(ball.begin(), ball.end());
        radius_ok += ball == oracle::ball(pts, q, r);

        PointCloud cloud;
        cloud.points = pts;
        const DensityProfile dp = estimate_point_density(cloud, r);
        bool same = true;
        for (std::size_t i = 0; i < n && same; ++i)
            same = dp.density[i] == oracle::ball(pts, pts[i], r).size();
        density_ok += same;

        TriangleMesh mesh;
        mesh.vertices = oracle::random_points(rng, 30);
        mesh.vertex_colors.assign(30, Rgba(1, 1, 1, 1));
        std::set<std::size_t> expect;
        for (std::size_t i = 0; i < 30; ++i) {
            mesh.highlight.push_back(rng() % 4 == 0);
            if (mesh.highlight.back()) {
                for (std::size_t j : oracle::ball(pts, mesh.vertices[i], r))
                    expect.insert(j);
            }
        }
        mapping_ok += map_blind_spots(mesh, cloud, r).indices == std::vector<std::size_t>(expect.begin(), expect.end());
    }
    return {knn_ok == 200 && radius_ok == 200 && density_ok == 200 && mapping_ok == 200,
            "knn " + std::to_string(knn_ok) + "/200, radius " + std::to_string(radius_ok) + "/200, density " +
                std::to_string(density_ok) + "/200, mapping " + std::to_string(mapping_ok) + "/200"};
}

// Wire

TriangleMesh strip(std::size_t n)
{
    TriangleMesh m;
    for (std::size_t i = 0; i < n; ++i) {
        m.vertices.emplace_back(0.1 * double(i), double(i % 2), 0.0);
        m.vertex_colors.emplace_back(double(i % 3) / 2, 0.5, 1.0, 0.35);
    }
    for (std::size_t i = 0; i + 2 < n; ++i)
        m.triangles.push_back({std::uint32_t(i), std::uint32_t(i + 1), std::uint32_t(i + 2)});
    return m;
}

Verdict wire_suite()
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<float> coord(-100.f, 100.f);
    int round_trips = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        wire::MeshMessage m;
        const std::size_t n = rng() % 64;
        for (std::size_t i = 0; i < n; ++i) {
            m.positions.emplace_back(coord(rng), coord(rng), coord(rng));
            m.colors.emplace_back(rng() & 0xff, rng() & 0xff, rng() & 0xff, rng() & 0xff);
        }
        for (std::size_t t = 0; n >= 3 && t < n; ++t) {
            const std::uint32_t a = rng() % n, b = (a + 1) % n, c = (a + 2) % n;
            m.triangles.push_back({a, b, c});
        }
        if (n > 0 && trial % 2) {
            m.flags = wire::kFlagDensities;
            for (std::size_t i = 0; i < n; ++i)
                m.densities.push_back(std::abs(coord(rng)));
        }
        const wire::MeshMessage back = wire::decode_message(wire::encode_message(m));
        round_trips += back == m && wire::to_message(wire::to_mesh(back)) == m;
    }

    ServerOptions o;
    o.host = "127.0.0.1";
    o.tcp_port = 0;
    o.ws_port = 0;
    BroadcastServer server(o);
    std::vector<testing::RawClient> clients;
    for (int i = 0; i < 3; ++i)
        clients.emplace_back(server.tcp_port());
    for (int i = 0; i < 500 && server.client_count() < 3; ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    const TriangleMesh mesh = strip(2000);
    server.publish(mesh);
    const std::string frame = wire::encode_frame(wire::encode_mesh(mesh));
    int identical = 0;
    for (auto& c : clients)
        identical += c.read_exact(frame.size()) == frame;
    server.stop();

    int chunked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> payloads;
        std::string stream;
        for (int i = 0; i < 1 + trial % 6; ++i) {
            payloads.push_back(wire::encode_mesh(strip(rng() % 50)));
            stream += wire::encode_frame(payloads.back());
        }
        wire::FrameReader reader;
        std::vector<std::string> got;
        for (std::size_t at = 0; at < stream.size();) {
            const std::size_t len = std::min<std::size_t>(1 + rng() % 64, stream.size() - at);
            reader.feed(std::string_view(stream).substr(at, len));
            at += len;
            while (auto p = reader.next())
                got.push_back(*p);
        }
        chunked += got == payloads && reader.pending() == 0;
    }
    return {round_trips == 1000 && identical == 3 && chunked == 200,
            "round trips " + std::to_string(round_trips) + "/1000, identical clients " + std::to_string(identical) +
                "/3, chunked streams " + std::to_string(chunked) + "/200"};
}

// Image metrics

Image random_image(std::mt19937_64& rng, int w, int h)
{
    std::uniform_int_distribution<int> u(0, 255);
    Image img(w, h, 1);
    for (auto& v : img.pixels)
        v = u(rng) / 255.0;
    return img;
}

Verdict image_suite()
{
    std::mt19937_64 rng(5);
    SsimParams global;
    global.mode = SsimMode::Global;
    bool identity = true, symmetric = true, monotone = true;
    std::vector<std::pair<double, double>> pairs;
    for (int t = 0; t < 100; ++t) {
        const Image x = random_image(rng, 24, 20), y = random_image(rng, 24, 20);
        identity = identity && ssim(x, x) == 1.0 && ssim(x, x, global) == 1.0;
        symmetric = symmetric && ssim(x, y) == ssim(y, x) && ssim(x, y, global) == ssim(y, x, global);
        pairs.emplace_back(mse(x, y), psnr(x, y));
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i)
        monotone = monotone && (pairs[i].first == pairs[i - 1].first || pairs[i].second < pairs[i - 1].second);
    const double c1 = 1e-4, closed = c1 / (1 + c1);
    const double g = ssim(Image(12, 12, 1, 0.0), Image(12, 12, 1, 1.0), global);
    const double w = ssim(Image(16, 16, 1, 0.0), Image(16, 16, 1, 1.0));
    const bool constant = std::abs(g - closed) <= 1e-9 && std::abs(w - closed) <= 1e-9;
    return {identity && symmetric && monotone && constant,
            std::string("identity ") + (identity ? "exact" : "broken") + ", symmetry " +
                (symmetric ? "exact" : "broken") + ", constant images " + fmt("%.6e", g) + ", psnr " +
                (monotone ? "decreasing" : "not decreasing") + " in mse over 100 pairs"};
}

// Determinism

std::string report_without_timings(const fs::path& p)
{
    nlohmann::json j = nlohmann::json::parse(read_file(p.string()));
    j.erase("timings");
    return j.dump();
}

Verdict determinism()
{
    const fs::path first = seed_dir("hole", 1);
    if (!fs::exists(first / "report.json"))
        run_pipeline(default_scene(1), PipelineConfig{}, first.string());
    const fs::path second = seed_dir("repeat", 1);
    run_pipeline(default_scene(1), PipelineConfig{}, second.string());
    std::string detail;
    bool ok = true;
    for (const char* f : {"mesh.ply", "simplified.ply"}) {
        const bool same = read_file((first / f).string()) == read_file((second / f).string());
        ok = ok && same;
        detail += std::string(f) + (same ? " identical, " : " differs, ");
    }
    const bool same_report = report_without_timings(first / "report.json") == report_without_timings(second / "report.json");
    detail += std::string("report.json ") + (same_report ? "identical" : "differs") + " apart from timings";
    return {ok && same_report, detail};
}

struct Criterion
{
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {"metric fixture", 0.001, table_metrics},
        {"psnr/mse consistency", 0.001, psnr_rows},
        {"sphere reconstruction", 30, sphere},
        {"planted-hole detection", 5 * 60, planted_hole},
        {"simplification", 10, simplification},
        {"oracle equivalence", 30, oracle_suite},
        {"wire round trip", 20, wire_suite},
        {"image metric properties", 10, image_suite},
        {"determinism", std::numeric_limits<double>::infinity(), determinism},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = Clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = s < c.limit_s;
        const bool pass = v.ok && in_time;
        failures += !pass;
        std::string timing = s < 0.01 ? fmt("%.3f ms", s * 1e3) : fmt("%.2f s", s);
        if (std::isfinite(c.limit_s))
            timing += c.limit_s < 0.01 ? fmt(" of %.0f ms", c.limit_s * 1e3) : fmt(" of %.0f s", c.limit_s);
        std::printf("%s  %-24s %s [%s]%s\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), timing.c_str(),
                    in_time ? "" : " over time limit");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
