#include "limrsf/blindspot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "limrsf/error.hpp"
#include "limrsf/geometry/spatial_index.hpp"

namespace limrsf {

DensityProfile estimate_point_density(const PointCloud& cloud, double radius)
{
    if (!(radius > 0.0))
        throw InvalidArgument("density radius must be positive");
    DensityProfile profile;
    profile.radius = radius;
    profile.density.resize(cloud.size());
    if (cloud.empty())
        return profile;
    const SpatialIndex index(cloud);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        profile.density[i] = index.radius_count(cloud.points[i], radius);
    return profile;
}

std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile)
{
    if (values.empty())
        throw InvalidArgument("percentile of an empty sample");
    if (!(percentile > 0.0 && percentile < 100.0))
        throw InvalidArgument("percentile must lie in (0, 100)");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

GroundTruthSet identify_low_density(const DensityProfile& profile, double percentile)
{
    GroundTruthSet g;
    g.percentile = percentile;
    const std::size_t t = nearest_rank_percentile(profile.density, percentile);
    g.threshold = static_cast<double>(t);
    for (std::size_t i = 0; i < profile.density.size(); ++i) {
        if (profile.density[i] < t)
            g.indices.push_back(i);
    }
    return g;
}

MappedSet map_blind_spots(const TriangleMesh& mesh, const PointCloud& cloud, double map_radius)
{
    if (!(map_radius > 0.0))
        throw InvalidArgument("map radius must be positive");
    if (!mesh.has_highlights())
        throw InvalidArgument("mapping needs highlight flags on the mesh");
    MappedSet m;
    m.map_radius = map_radius;
    if (cloud.empty() || mesh.highlighted_count() == 0)
        return m;
    const SpatialIndex index(cloud);
    std::vector<std::uint8_t> hit(cloud.size(), 0);
    std::vector<std::size_t> ball;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (!mesh.highlight[v])
            continue;
        index.radius_search(mesh.vertices[v], map_radius, ball);
        for (auto i : ball)
            hit[i] = 1;
    }
    for (std::size_t i = 0; i < hit.size(); ++i) {
        if (hit[i])
            m.indices.push_back(i);
    }
    return m;
}

std::vector<std::size_t> points_near_boxes(const PointCloud& cloud, const std::vector<std::pair<Point3, Point3>>& boxes,
                                           double radius)
{
    std::vector<std::size_t> out;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Point3& p = cloud.points[i];
        for (const auto& [lo, hi] : boxes) {
            const Point3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
            if (d.squaredNorm() <= r2) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

DetectionReport detection_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn)
{
    DetectionReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
    r.precision = tp + fp == 0 ? 0.0 : d(tp) / d(tp + fp);
    r.recall = tp + fn == 0 ? 0.0 : d(tp) / d(tp + fn);
    r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.iou = tp + fp + fn == 0 ? 0.0 : d(tp) / d(tp + fp + fn);
    return r;
}

DetectionReport detection_metrics(const std::vector<std::size_t>& mapped, const std::vector<std::size_t>& truth)
{
    std::vector<std::size_t> m = mapped, g = truth;
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    std::vector<std::size_t> both;
    std::set_intersection(m.begin(), m.end(), g.begin(), g.end(), std::back_inserter(both));
    const std::uint64_t tp = both.size();
    return detection_metrics(tp, m.size() - tp, g.size() - tp);
}

} // namespace limrsf
