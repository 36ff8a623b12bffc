#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "limrsf/error.hpp"
#include "limrsf/geometry/normals.hpp"
#include "limrsf/geometry/outliers.hpp"
#include "limrsf/geometry/spatial_index.hpp"
#include "oracles.hpp"

namespace limrsf {
namespace {

std::vector<Point3> unit_grid(int n)
{
    std::vector<Point3> pts;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                pts.emplace_back(x, y, z);
    return pts;
}

TEST(SpatialIndexTest, GridPointIsItsOwnNearest)
{
    const SpatialIndex index(unit_grid(4));
    const auto nn = index.knn(Point3(2, 1, 3), 1);
    ASSERT_EQ(nn.size(), 1u);
    EXPECT_EQ(index.point(nn[0].index), Point3(2, 1, 3));
    EXPECT_EQ(nn[0].distance, 0.0);
}

TEST(SpatialIndexTest, TiesGoToLowerIndex)
{
    const std::vector<Point3> pts{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}};
    const SpatialIndex index(pts);
    EXPECT_EQ(index.knn(Point3::Zero(), 1)[0].index, 0u);
    const auto two = index.knn(Point3::Zero(), 2);
    EXPECT_EQ(two[0].index, 0u);
    EXPECT_EQ(two[1].index, 1u);
}

TEST(SpatialIndexTest, KnnRejectsOversizedK)
{
    const SpatialIndex index(unit_grid(2));
    EXPECT_THROW(index.knn(Point3::Zero(), 9), InvalidArgument);
    EXPECT_THROW(index.knn(Point3::Zero(), 0), InvalidArgument);
}

TEST(SpatialIndexTest, RadiusSmallerThanGapIsEmpty)
{
    const SpatialIndex index(unit_grid(3));
    EXPECT_TRUE(index.radius_search(Point3(0.5, 0.5, 0.5), 0.1).empty());
    const auto self = index.radius_search(Point3(1, 1, 1), 1e-9);
    ASSERT_EQ(self.size(), 1u);
    EXPECT_EQ(index.point(self[0]), Point3(1, 1, 1));
    EXPECT_THROW(index.radius_search(Point3::Zero(), 0.0), InvalidArgument);
}

TEST(SpatialIndexTest, ClosedBallIncludesBoundary)
{
    const std::vector<Point3> pts{{0, 0, 0}, {0.5, 0, 0}};
    const SpatialIndex index(pts);
    EXPECT_EQ(index.radius_search(Point3::Zero(), 0.5).size(), 2u);
}

TEST(SpatialIndexTest, MatchesBruteForceOnRandomClouds)
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> size(1, 300);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = oracle::random_points(rng, size(rng));
        // Duplicate a few points so ties actually occur.
        if (pts.size() > 4) {
            pts[1] = pts[0];
            pts[3] = pts[2];
        }
        const SpatialIndex index(pts);
        const auto q = oracle::random_points(rng, 1)[0];
        const std::size_t k = std::min<std::size_t>(pts.size(), 1 + trial % 12);
        const auto got = index.knn(q, k);
        const auto want = oracle::knn(pts, q, k);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < k; ++i)
            ASSERT_EQ(got[i].index, want[i]) << "trial " << trial;
        const auto at_point = index.knn(pts[0], k);
        const auto want_at = oracle::knn(pts, pts[0], k);
        for (std::size_t i = 0; i < k; ++i)
            ASSERT_EQ(at_point[i].index, want_at[i]);

        const double r = 0.05 + 0.3 * (trial % 5) / 4.0;
        EXPECT_EQ(index.radius_search(q, r), oracle::ball(pts, q, r));
        EXPECT_EQ(index.radius_count(q, r), oracle::ball(pts, q, r).size());
    }
}

PointCloud cloud_of(std::vector<Point3> pts)
{
    PointCloud c;
    c.points = std::move(pts);
    return c;
}

TEST(OutlierTest, PerfectGridLosesOnlyItsCorners)
{
    // The brute-force oracle gives interior d = 1, corners d = (3 + 3*sqrt(2))/6
    // = 1.2071, mu = 1.0828 and sigma = 0.0586, so the threshold is 1.2000 and
    // exactly the eight corners exceed it.
    const auto pts = unit_grid(5);
    const auto d = oracle::mean_knn_distances(pts, 6);
    double mu = 0.0;
    for (double v : d)
        mu += v;
    mu /= d.size();
    double var = 0.0;
    for (double v : d)
        var += (v - mu) * (v - mu);
    const double threshold = mu + 2.0 * std::sqrt(var / d.size());
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > threshold)
            expected.push_back(i);
    }
    ASSERT_EQ(expected, (std::vector<std::size_t>{0, 4, 20, 24, 100, 104, 120, 124}));
    EXPECT_NEAR(threshold, 1.2, 1e-12);

    const auto result = remove_statistical_outliers(cloud_of(pts), {6, 2.0});
    EXPECT_EQ(result.removed, expected);
    EXPECT_EQ(result.filtered.size(), 117u);
    EXPECT_NEAR(result.stats.threshold, threshold, 1e-12);
    EXPECT_EQ(result.stats.threshold, result.stats.mean + 2.0 * result.stats.stddev);
    EXPECT_DOUBLE_EQ(result.stats.mean_knn_distance[62], 1.0); // interior point (2,2,2)

    // A looser ratio keeps the whole grid.
    EXPECT_TRUE(remove_statistical_outliers(cloud_of(pts), {6, 2.5}).removed.empty());
}

TEST(OutlierTest, FarPointIsTheOnlyOutlier)
{
    auto pts = unit_grid(5);
    pts.emplace_back(100, 100, 100);
    const auto d = oracle::mean_knn_distances(pts, 6);
    const auto result = remove_statistical_outliers(cloud_of(pts), {6, 2.0});
    ASSERT_EQ(result.removed.size(), 1u);
    EXPECT_EQ(result.removed[0], 125u);
    EXPECT_GT(d[125], 5.0 * result.stats.threshold);
    EXPECT_NEAR(result.stats.mean_knn_distance[125], d[125], 1e-9);
}

TEST(OutlierTest, IdenticalPointsAreNeverRemoved)
{
    const auto result = remove_statistical_outliers(cloud_of(std::vector<Point3>(10, Point3(1, 2, 3))), {3, 2.0});
    EXPECT_EQ(result.stats.stddev, 0.0);
    EXPECT_EQ(result.stats.threshold, 0.0);
    EXPECT_TRUE(result.removed.empty());
}

TEST(OutlierTest, TooSmallCloudThrows)
{
    EXPECT_THROW(remove_statistical_outliers(cloud_of(unit_grid(2)), {8, 2.0}), InvalidArgument);
}

TEST(OutlierTest, ColorsAndNormalsFollowSurvivors)
{
    auto pts = unit_grid(3);
    pts.emplace_back(50, 50, 50);
    PointCloud c = cloud_of(pts);
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.colors.emplace_back(i / 40.0, 0, 0);
        c.normals.emplace_back(0, 0, 1);
    }
    const auto result = remove_statistical_outliers(c, {4, 2.0});
    ASSERT_EQ(result.removed, std::vector<std::size_t>{27});
    ASSERT_EQ(result.filtered.colors.size(), 27u);
    for (std::size_t i = 0; i < 27; ++i) {
        EXPECT_EQ(result.filtered.points[i], pts[i]);
        EXPECT_EQ(result.filtered.colors[i].x(), i / 40.0);
    }
}

TEST(OutlierTest, ClassificationAgreesWithOracleOnNoisyClouds)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto pts = oracle::random_points(rng, 120);
        auto far = oracle::random_points(rng, 3, 20.0);
        pts.insert(pts.end(), far.begin(), far.end());
        const auto d = oracle::mean_knn_distances(pts, 5);
        const auto result = remove_statistical_outliers(cloud_of(pts), {5, 1.5});
        std::vector<bool> removed(pts.size(), false);
        for (auto i : result.removed)
            removed[i] = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ASSERT_NEAR(result.stats.mean_knn_distance[i], d[i], 1e-12);
            if (removed[i])
                EXPECT_GT(d[i], result.stats.threshold);
            else
                EXPECT_LE(d[i], result.stats.threshold);
        }
    }
}

TEST(NormalTest, PlaneNormalsPointToViewpoint)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud c;
    for (int i = 0; i < 100; ++i)
        c.points.emplace_back(u(rng), u(rng), 0.0);
    const auto est = estimate_normals(c, {0.5, Point3(0, 0, 10), 3});
    EXPECT_TRUE(est.degenerate.empty());
    for (const auto& n : est.cloud.normals) {
        EXPECT_NEAR(n.x(), 0.0, 1e-6);
        EXPECT_NEAR(n.y(), 0.0, 1e-6);
        EXPECT_NEAR(n.z(), 1.0, 1e-6);
    }
}

TEST(NormalTest, SphereNormalsFaceInteriorViewpoint)
{
    PointCloud c;
    c.points = oracle::fibonacci_sphere(2000);
    const auto est = estimate_normals(c, {0.2, Point3::Zero(), 3});
    ASSERT_TRUE(est.degenerate.empty());
    for (std::size_t i = 0; i < c.size(); ++i)
        EXPECT_GT(est.cloud.normals[i].dot(-c.points[i]), 0.99);
}

TEST(NormalTest, IsolatedPointIsDegenerate)
{
    PointCloud c;
    c.points = {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}, {0.1, 0.1, 0.01}, {10, 10, 10}};
    const auto est = estimate_normals(c, {0.5, Point3::Zero(), 3});
    ASSERT_EQ(est.degenerate, std::vector<std::size_t>{4});
    EXPECT_EQ(est.cloud.normals[4], Point3::Zero());
    EXPECT_NEAR(est.cloud.normals[0].norm(), 1.0, 1e-12);
}

TEST(NormalTest, CollinearNeighbourhoodIsDegenerate)
{
    PointCloud c;
    for (int i = 0; i < 5; ++i)
        c.points.emplace_back(0.1 * i, 0, 0);
    const auto est = estimate_normals(c, {1.0, Point3(0, 0, 1), 3});
    EXPECT_EQ(est.degenerate.size(), 5u);
}

TEST(NormalTest, UnitLengthEigenResidualAndOrientation)
{
    std::mt19937_64 rng(5);
    PointCloud c;
    c.points = oracle::random_points(rng, 400);
    const Point3 vp(0.3, -2.0, 0.7);
    const NormalParams params{0.25, vp, 3};
    const auto est = estimate_normals(c, params);
    std::vector<bool> degenerate(c.size(), false);
    for (auto i : est.degenerate)
        degenerate[i] = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (degenerate[i])
            continue;
        const Point3& n = est.cloud.normals[i];
        ASSERT_NEAR(n.norm(), 1.0, 1e-6);
        ASSERT_GE(n.dot(vp - c.points[i]), 0.0);
        // Recompute the covariance independently and check the eigen-residual.
        const auto nb = oracle::ball(c.points, c.points[i], params.radius);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (auto j : nb)
            mean += c.points[j];
        mean /= nb.size();
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (auto j : nb)
            cov += (c.points[j] - mean) * (c.points[j] - mean).transpose();
        cov /= nb.size();
        const double lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov, Eigen::EigenvaluesOnly)
                                      .eigenvalues()[0];
        EXPECT_LE((cov * n - lambda_min * n).norm(), 1e-6 * cov.norm());
    }
}

} // namespace
} // namespace limrsf
