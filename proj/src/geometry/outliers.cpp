#include "limrsf/geometry/outliers.hpp"

#include <cmath>
#include <string>

#include "limrsf/error.hpp"
#include "limrsf/geometry/spatial_index.hpp"

namespace limrsf {

OutlierResult remove_statistical_outliers(const PointCloud& cloud, const OutlierParams& params)
{
    if (params.k < 1)
        throw InvalidArgument("outlier removal: k must be >= 1");
    if (!(params.std_ratio > 0.0))
        throw InvalidArgument("outlier removal: std_ratio must be positive");
    if (cloud.size() <= params.k)
        throw InvalidArgument("outlier removal: cloud of " + std::to_string(cloud.size()) +
                              " points is too small for k = " + std::to_string(params.k));

    const SpatialIndex index(cloud);
    const std::size_t n = cloud.size();
    OutlierResult result;
    DistanceStats& stats = result.stats;
    stats.mean_knn_distance.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        auto nn = index.knn(cloud.points[i], params.k + 1);
        double sum = 0.0;
        std::size_t used = 0;
        for (const Neighbor& nb : nn) {
            if (nb.index == i || used == params.k)
                continue;
            sum += nb.distance;
            ++used;
        }
        stats.mean_knn_distance[i] = sum / static_cast<double>(params.k);
    }

    double sum = 0.0;
    for (double d : stats.mean_knn_distance)
        sum += d;
    stats.mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double d : stats.mean_knn_distance)
        var += (d - stats.mean) * (d - stats.mean);
    stats.stddev = std::sqrt(var / static_cast<double>(n));
    stats.threshold = stats.mean + params.std_ratio * stats.stddev;

    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (stats.mean_knn_distance[i] > stats.threshold)
            result.removed.push_back(i);
        else
            keep.push_back(i);
    }
    result.filtered = cloud.select(keep);
    return result;
}

} // namespace limrsf
