#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "limrsf/geometry/point_cloud.hpp"

namespace limrsf {

struct Neighbor
{
    std::size_t index;
    double distance;
};

/// Immutable k-d tree over a set of positions.
///
/// Results are exact: knn returns the same list a brute-force scan sorted by
/// (squared distance, index) would, and radius queries use the closed ball.
/// All queries are const and safe to call concurrently.
class SpatialIndex
{
public:
    SpatialIndex() = default;
    explicit SpatialIndex(std::span<const Point3> points);
    explicit SpatialIndex(const PointCloud& cloud) : SpatialIndex(std::span<const Point3>(cloud.points)) {}

    std::size_t size() const noexcept { return points_.size(); }
    const Point3& point(std::size_t i) const { return points_[i]; }

    /// The k nearest points in ascending distance, ties broken by lower index.
    /// Throws InvalidArgument when k == 0 or k > size().
    std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

    /// Indices of all points with ||p - query|| <= radius, ascending.
    std::vector<std::size_t> radius_search(const Point3& query, double radius) const;
    /// Buffer-reusing variant; `out` is cleared first.
    void radius_search(const Point3& query, double radius, std::vector<std::size_t>& out) const;
    /// Number of points in the closed ball.
    std::size_t radius_count(const Point3& query, double radius) const;
    /// Calls visit(index) for every point in the closed ball, in tree order.
    template <typename Visit>
    void for_each_in_ball(const Point3& query, double radius, Visit&& visit) const;

private:
    struct Node
    {
        // Leaf when `left` == kLeaf; [begin, end) indexes order_.
        std::uint32_t begin;
        std::uint32_t end;
        std::uint32_t left;
        std::uint32_t right;
        int axis;
        double split;
        Eigen::Vector3d lo;
        Eigen::Vector3d hi;
    };
    static constexpr std::uint32_t kLeaf = 0xffffffffu;
    static constexpr std::uint32_t kLeafSize = 12;

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    static double box_distance2(const Node& node, const Point3& q)
    {
        return (node.lo - q).cwiseMax(q - node.hi).cwiseMax(0.0).squaredNorm();
    }

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

template <typename Visit>
void SpatialIndex::for_each_in_ball(const Point3& query, double radius, Visit&& visit) const
{
    if (nodes_.empty())
        return;
    const double r2 = radius * radius;
    std::uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (box_distance2(node, query) > r2)
            continue;
        if (node.left == kLeaf) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t idx = order_[i];
                if ((points_[idx] - query).squaredNorm() <= r2)
                    visit(static_cast<std::size_t>(idx));
            }
            continue;
        }
        stack[top++] = node.left;
        stack[top++] = node.right;
    }
}

} // namespace limrsf
