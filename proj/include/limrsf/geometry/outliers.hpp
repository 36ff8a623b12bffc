#pragma once

#include <cstddef>
#include <vector>

#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

struct OutlierParams
{
    std::size_t k = 20;
    double std_ratio = 2.0;
};

struct DistanceStats
{
    /// Mean distance from each point to its k nearest neighbours (itself excluded).
    std::vector<double> mean_knn_distance;
    double mean = 0.0;
    /// Population standard deviation of mean_knn_distance.
    double stddev = 0.0;
    double threshold = 0.0;
};

struct OutlierResult
{
    PointCloud filtered;
    std::vector<std::size_t> removed;
    DistanceStats stats;
};

/// Statistical outlier removal: drops every point whose mean k-NN distance
/// strictly exceeds mean + std_ratio * stddev. Survivors keep their order.
/// Requires size() > k.
OutlierResult remove_statistical_outliers(const PointCloud& cloud, const OutlierParams& params);

} // namespace limrsf
