#include "limrsf/geometry/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "limrsf/error.hpp"

namespace limrsf {

namespace {

struct HeapEntry
{
    double d2;
    std::size_t index;
    bool operator<(const HeapEntry& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

} // namespace

SpatialIndex::SpatialIndex(std::span<const Point3> points) : points_(points.begin(), points.end())
{
    if (points_.size() >= std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("too many points for spatial index");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 1);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Eigen::Vector3d lo = points_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    Node node{begin, end, kLeaf, kLeaf, 0, 0.0, lo, hi};
    if (end - begin > kLeafSize) {
        Eigen::Index axis = 0;
        (hi - lo).maxCoeff(&axis);
        const std::uint32_t mid = begin + (end - begin) / 2;
        auto cmp = [&](std::uint32_t a, std::uint32_t b) {
            const double pa = points_[a][axis], pb = points_[b][axis];
            return pa < pb || (pa == pb && a < b);
        };
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, cmp);
        node.axis = static_cast<int>(axis);
        node.split = points_[order_[mid]][axis];
        node.left = build(begin, mid);
        node.right = build(mid, end);
    }
    nodes_[id] = node;
    return id;
}

std::vector<Neighbor> SpatialIndex::knn(const Point3& query, std::size_t k) const
{
    if (k == 0)
        throw InvalidArgument("knn: k must be positive");
    if (k > points_.size())
        throw InvalidArgument("knn: k = " + std::to_string(k) + " exceeds population " +
                              std::to_string(points_.size()));

    std::priority_queue<HeapEntry> heap; // max-heap on (d2, index)
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        // Equal distance may still win on index, so only prune strictly farther boxes.
        if (heap.size() == k && box_distance2(node, query) > heap.top().d2)
            continue;
        if (node.left == kLeaf) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = order_[i];
                const HeapEntry e{(points_[idx] - query).squaredNorm(), idx};
                if (heap.size() < k)
                    heap.push(e);
                else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            continue;
        }
        // Visit the nearer child first (pushed last).
        const bool go_left = query[node.axis] < node.split;
        stack.push_back(go_left ? node.right : node.left);
        stack.push_back(go_left ? node.left : node.right);
    }

    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = {heap.top().index, std::sqrt(heap.top().d2)};
        heap.pop();
    }
    return out;
}

void SpatialIndex::radius_search(const Point3& query, double radius, std::vector<std::size_t>& out) const
{
    if (!(radius > 0.0))
        throw InvalidArgument("radius_search: radius must be positive");
    out.clear();
    for_each_in_ball(query, radius, [&](std::size_t idx) { out.push_back(idx); });
    std::sort(out.begin(), out.end());
}

std::vector<std::size_t> SpatialIndex::radius_search(const Point3& query, double radius) const
{
    std::vector<std::size_t> out;
    radius_search(query, radius, out);
    return out;
}

std::size_t SpatialIndex::radius_count(const Point3& query, double radius) const
{
    if (!(radius > 0.0))
        throw InvalidArgument("radius_count: radius must be positive");
    std::size_t n = 0;
    for_each_in_ball(query, radius, [&](std::size_t) { ++n; });
    return n;
}

} // namespace limrsf
