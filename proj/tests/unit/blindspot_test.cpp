#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "limrsf/blindspot/evaluation.hpp"
#include "limrsf/error.hpp"
#include "oracles.hpp"

using namespace limrsf;

namespace {

DensityProfile profile_of(std::vector<std::size_t> d)
{
    DensityProfile p;
    p.radius = 1.0;
    p.density = std::move(d);
    return p;
}

std::vector<std::size_t> random_subset(std::mt19937_64& rng, std::size_t n, double fraction)
{
    std::bernoulli_distribution pick(fraction);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (pick(rng))
            out.push_back(i);
    }
    return out;
}

} // namespace

TEST(PointDensity, SinglePointCountsItself)
{
    PointCloud c;
    c.points = {{1, 2, 3}};
    EXPECT_EQ(estimate_point_density(c, 0.1).density, (std::vector<std::size_t>{1}));
}

TEST(PointDensity, BoundaryDistanceIsInside)
{
    PointCloud c;
    c.points = {{0, 0, 0}, {0.5, 0, 0}};
    EXPECT_EQ(estimate_point_density(c, 0.5).density, (std::vector<std::size_t>{2, 2}));
}

TEST(PointDensity, MatchesBruteForceAndIsSymmetric)
{
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        PointCloud c;
        c.points = oracle::random_points(rng, 100);
        const double r = 0.1 + 0.02 * trial;
        const DensityProfile p = estimate_point_density(c, r);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto ball = oracle::ball(c.points, c.points[i], r);
            ASSERT_EQ(p.density[i], ball.size());
            for (auto j : ball) {
                const auto back = oracle::ball(c.points, c.points[j], r);
                ASSERT_TRUE(std::binary_search(back.begin(), back.end(), i));
            }
        }
    }
}

TEST(PointDensity, RadiusMustBePositive)
{
    PointCloud c;
    c.points = {{0, 0, 0}};
    EXPECT_THROW(estimate_point_density(c, 0.0), InvalidArgument);
}

TEST(LowDensity, OneToTenAtSixtyPercent)
{
    const GroundTruthSet g = identify_low_density(profile_of({3, 9, 1, 6, 10, 2, 8, 4, 7, 5}), 60);
    EXPECT_EQ(g.threshold, 6.0);
    EXPECT_EQ(g.indices, (std::vector<std::size_t>{0, 2, 5, 7, 9}));
}

TEST(LowDensity, EqualDensitiesGiveNothing)
{
    EXPECT_TRUE(identify_low_density(profile_of({4, 4, 4, 4}), 60).indices.empty());
}

TEST(LowDensity, NearestRankOfTwoAtFifty)
{
    const GroundTruthSet g = identify_low_density(profile_of({5, 1}), 50);
    EXPECT_EQ(g.threshold, 1.0);
    EXPECT_TRUE(g.indices.empty());
}

TEST(LowDensity, MatchesSortedRankOracle)
{
    std::mt19937_64 rng(62);
    std::uniform_int_distribution<std::size_t> u(1, 40);
    std::uniform_real_distribution<double> pct(0.5, 99.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> d(1 + trial % 37);
        for (auto& v : d)
            v = u(rng);
        const double p = pct(rng);
        auto sorted = d;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = 1;
        while (static_cast<double>(rank) < p / 100.0 * static_cast<double>(d.size()))
            ++rank;
        const GroundTruthSet g = identify_low_density(profile_of(d), p);
        ASSERT_EQ(g.threshold, static_cast<double>(sorted[rank - 1]));
        for (std::size_t i = 0; i < d.size(); ++i)
            ASSERT_EQ(std::binary_search(g.indices.begin(), g.indices.end(), i), d[i] < sorted[rank - 1]);
    }
}

TEST(LowDensity, BadInputsAreErrors)
{
    EXPECT_THROW(identify_low_density(profile_of({}), 60), InvalidArgument);
    EXPECT_THROW(identify_low_density(profile_of({1, 2}), 0), InvalidArgument);
    EXPECT_THROW(identify_low_density(profile_of({1, 2}), 100), InvalidArgument);
}

TEST(Mapping, NoHighlightsGiveEmptySet)
{
    TriangleMesh m;
    m.vertices = {{0, 0, 0}};
    m.vertex_colors = {Rgba(1, 1, 1, 1)};
    m.highlight = {0};
    PointCloud c;
    c.points = {{0, 0, 0}};
    EXPECT_TRUE(map_blind_spots(m, c, 1.0).indices.empty());
}

TEST(Mapping, CoincidentVertexWithTinyRadius)
{
    TriangleMesh m;
    m.vertices = {{0.5, 0.5, 0.5}};
    m.vertex_colors = {Rgba(1, 0, 0, 1)};
    m.highlight = {1};
    PointCloud c;
    c.points = {{0, 0, 0}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.50001}};
    EXPECT_EQ(map_blind_spots(m, c, 1e-9).indices, (std::vector<std::size_t>{1}));
}

TEST(Mapping, MatchesBruteForceUnion)
{
    std::mt19937_64 rng(63);
    std::bernoulli_distribution pick(0.2);
    for (int trial = 0; trial < 20; ++trial) {
        TriangleMesh m;
        m.vertices = oracle::random_points(rng, 40);
        m.vertex_colors.assign(40, Rgba(1, 1, 1, 1));
        for (int v = 0; v < 40; ++v)
            m.highlight.push_back(pick(rng));
        PointCloud c;
        c.points = oracle::random_points(rng, 200);
        const double r = 0.05 + 0.01 * trial;
        std::set<std::size_t> expect;
        for (int v = 0; v < 40; ++v) {
            if (m.highlight[v]) {
                for (auto i : oracle::ball(c.points, m.vertices[v], r))
                    expect.insert(i);
            }
        }
        EXPECT_EQ(map_blind_spots(m, c, r).indices, std::vector<std::size_t>(expect.begin(), expect.end()));
    }
}

TEST(Mapping, MissingHighlightFlagsIsAnError)
{
    TriangleMesh m;
    m.vertices = {{0, 0, 0}};
    m.vertex_colors = {Rgba(1, 1, 1, 1)};
    PointCloud c;
    c.points = {{0, 0, 0}};
    EXPECT_THROW(map_blind_spots(m, c, 1.0), InvalidArgument);
}

TEST(HoleBoxes, PointsNearBoxes)
{
    PointCloud c;
    c.points = {{0, 0, 0}, {1.5, 0.5, 0.5}, {1.6, 0.5, 0.5}, {0.5, 0.5, 0.5}, {-0.3, -0.3, 0}};
    const std::vector<std::pair<Point3, Point3>> boxes{{Point3(0, 0, 0), Point3(1, 1, 1)}};
    EXPECT_EQ(points_near_boxes(c, boxes, 0.5), (std::vector<std::size_t>{0, 1, 3, 4}));
}

TEST(Metrics, PublishedCountsRow)
{
    const DetectionReport r = detection_metrics(1333390, 701158, 152182);
    EXPECT_NEAR(r.iou, 0.6098, 5e-5);
    EXPECT_NEAR(r.precision, 0.6554, 5e-5);
    EXPECT_NEAR(r.recall, 0.8976, 5e-5);
    EXPECT_NEAR(r.f1, 0.7576, 5e-5);
}

TEST(Metrics, PerfectAndDisjoint)
{
    const DetectionReport same = detection_metrics(std::vector<std::size_t>{1, 4, 9}, std::vector<std::size_t>{9, 4, 1});
    EXPECT_EQ(same.precision, 1.0);
    EXPECT_EQ(same.recall, 1.0);
    EXPECT_EQ(same.f1, 1.0);
    EXPECT_EQ(same.iou, 1.0);
    const DetectionReport none = detection_metrics(std::vector<std::size_t>{1, 2}, std::vector<std::size_t>{3});
    EXPECT_EQ(none.tp, 0u);
    EXPECT_EQ(none.fp, 2u);
    EXPECT_EQ(none.fn, 1u);
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.recall, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    EXPECT_EQ(none.iou, 0.0);
}

TEST(Metrics, ZeroDenominatorConventions)
{
    const DetectionReport empty = detection_metrics(0, 0, 0);
    EXPECT_EQ(empty.precision, 0.0);
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.f1, 0.0);
    EXPECT_EQ(empty.iou, 0.0);
    EXPECT_EQ(detection_metrics(0, 5, 0).recall, 0.0);
    EXPECT_EQ(detection_metrics(0, 0, 5).precision, 0.0);
}

TEST(Metrics, CountIdentitiesOnRandomSets)
{
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = random_subset(rng, 300, 0.3);
        const auto g = random_subset(rng, 300, 0.4);
        std::vector<std::size_t> uni;
        std::set_union(m.begin(), m.end(), g.begin(), g.end(), std::back_inserter(uni));
        const DetectionReport r = detection_metrics(m, g);
        ASSERT_EQ(r.tp + r.fp + r.fn, uni.size());
        ASSERT_EQ(r.tp + r.fp, m.size());
        ASSERT_EQ(r.tp + r.fn, g.size());
        if (r.tp > 0) {
            ASSERT_NEAR(r.f1, 2 * r.iou / (1 + r.iou), 1e-12);
        }
    }
}

TEST(Metrics, HarmonicIdentityOnRandomCounts)
{
    std::mt19937_64 rng(65);
    std::uniform_int_distribution<std::uint64_t> u(0, 5'000'000);
    for (int trial = 0; trial < 1000; ++trial) {
        const DetectionReport r = detection_metrics(u(rng), u(rng), u(rng));
        ASSERT_NEAR(r.f1, 2 * r.iou / (1 + r.iou), 1e-12);
        ASSERT_GE(r.precision, 0.0);
        ASSERT_LE(r.precision, 1.0);
    }
}

TEST(Metrics, InvariantUnderConsistentRelabelling)
{
    std::mt19937_64 rng(66);
    std::vector<std::size_t> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_subset(rng, 300, 0.3);
        const auto g = random_subset(rng, 300, 0.3);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> pm, pg;
        for (auto i : m)
            pm.push_back(perm[i]);
        for (auto i : g)
            pg.push_back(perm[i]);
        const DetectionReport a = detection_metrics(m, g), b = detection_metrics(pm, pg);
        ASSERT_EQ(a.tp, b.tp);
        ASSERT_EQ(a.fp, b.fp);
        ASSERT_EQ(a.fn, b.fn);
        ASSERT_EQ(a.f1, b.f1);
    }
}
