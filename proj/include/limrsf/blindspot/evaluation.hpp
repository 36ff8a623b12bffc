#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "limrsf/geometry/point_cloud.hpp"
#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

/// Number of cloud points in the closed ball of radius `radius` around each
/// point, the point itself included (so every count is at least 1).
struct DensityProfile
{
    std::vector<std::size_t> density;
    double radius = 0.0;
};

/// Ground-truth blind spots: points whose density is strictly below the
/// nearest-rank percentile `threshold`.
struct GroundTruthSet
{
    std::vector<std::size_t> indices; // ascending
    double threshold = 0.0;
    double percentile = 0.0;
};

/// Cloud points within `map_radius` of some highlighted mesh vertex.
struct MappedSet
{
    std::vector<std::size_t> indices; // ascending, unique
    double map_radius = 0.0;
};

struct DetectionReport
{
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
};

DensityProfile estimate_point_density(const PointCloud& cloud, double radius);

/// Value at 1-based rank ceil(P/100 * N) of the ascending sorted sample.
/// Requires a non-empty sample and 0 < P < 100.
std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile);

GroundTruthSet identify_low_density(const DensityProfile& profile, double percentile);

MappedSet map_blind_spots(const TriangleMesh& mesh, const PointCloud& cloud, double map_radius);

/// Points within `radius` of an axis-aligned box [lo, hi] (inside counts as
/// distance zero). Used as ground truth when the missing regions are known.
std::vector<std::size_t> points_near_boxes(const PointCloud& cloud, const std::vector<std::pair<Point3, Point3>>& boxes,
                                           double radius);

/// Precision, recall, F1 and IoU from raw counts. Empty denominators give 0.
DetectionReport detection_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
/// Confusion counts of two index sets over the same cloud, then the metrics.
DetectionReport detection_metrics(const std::vector<std::size_t>& mapped, const std::vector<std::size_t>& truth);

} // namespace limrsf
