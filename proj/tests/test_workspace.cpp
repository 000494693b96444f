#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "plc/workspace.hpp"
#include "plc/workspace_io.hpp"

using namespace plc;

namespace {

RobotDescription chain(int n, int teeth = 10) {
    RobotDescription d;
    d.segment_count = n;
    d.tooth_count = teeth;
    return d;
}

}  // namespace

TEST(PositionKey, QuantizesToMicrometreCells) {
    const Eigen::Vector3d p(1.0, -2.5, 3.25);
    EXPECT_EQ(PositionKey::from(p), PositionKey::from(p + Eigen::Vector3d::Constant(3e-13)));
    EXPECT_EQ(PositionKey::from(p).cell, (std::array<std::int64_t, 3>{1000000, -2500000, 3250000}));
    EXPECT_NE(PositionKey::from(p), PositionKey::from(p + Eigen::Vector3d(2e-6, 0, 0)));
}

TEST(EnumerateWorkspace, DefaultRobotVisitsAllConfigurations) {
    const auto index = enumerate_workspace(default_robot());
    EXPECT_EQ(index.configuration_count(), 100000u);
    EXPECT_LE(index.point_count(), 100000u);
}

TEST(EnumerateWorkspace, SingleUnitPointsShareHeight) {
    const auto d = chain(1);
    const auto index = enumerate_workspace(d);
    EXPECT_LE(index.point_count(), 10u);
    const auto all = oracle::enumerate_all(d);
    for (const auto& p : all.positions) EXPECT_EQ(p.z(), all.positions.front().z());
    for (const auto& p : index.points()) EXPECT_EQ(p.z(), all.positions.front().z());
}

TEST(EnumerateWorkspace, BucketsPartitionTheEnumeration) {
    for (int n : {1, 2, 3, 4}) {
        const auto d = chain(n);
        const auto index = enumerate_workspace(d);
        std::size_t total = 0;
        for (std::size_t i = 0; i < index.point_count(); ++i) total += index.bucket_size(i);
        EXPECT_EQ(total, static_cast<std::size_t>(std::pow(10, n)));

        std::vector<std::uint64_t> seen(index.ordinals());
        std::sort(seen.begin(), seen.end());
        for (std::size_t o = 0; o < seen.size(); ++o) ASSERT_EQ(seen[o], o);

        for (std::size_t i = 0; i < index.point_count(); ++i) {
            ASSERT_GE(index.bucket_size(i), 1u);
            const auto bucket = index.bucket(i);
            EXPECT_TRUE(std::is_sorted(bucket.begin(), bucket.end()));
            for (const auto& c : bucket) EXPECT_EQ(PositionKey::from(end_position(d, c)), index.key(i));
            EXPECT_EQ(index.find(index.key(i)), static_cast<std::ptrdiff_t>(i));
        }
        for (std::size_t i = 1; i < index.point_count(); ++i) EXPECT_LT(index.key(i - 1), index.key(i));
    }
}

TEST(EnumerateWorkspace, TwoUnitBucketTotal) {
    const auto index = enumerate_workspace(chain(2));
    std::size_t total = 0;
    for (std::size_t i = 0; i < index.point_count(); ++i) total += index.bucket_size(i);
    EXPECT_EQ(total, 100u);
}

TEST(EnumerateWorkspace, MatchesBruteForceGrouping) {
    const auto d = chain(3);
    const auto all = oracle::enumerate_all(d);
    std::set<PositionKey> keys;
    for (const auto& p : all.positions) keys.insert(PositionKey::from(p));
    const auto index = enumerate_workspace(d);
    EXPECT_EQ(index.point_count(), keys.size());
}

TEST(EnumerateWorkspace, Deterministic) {
    const auto a = enumerate_workspace(chain(4));
    const auto b = enumerate_workspace(chain(4));
    ASSERT_EQ(a.point_count(), b.point_count());
    for (std::size_t i = 0; i < a.point_count(); ++i) EXPECT_TRUE(a.point(i) == b.point(i));
    EXPECT_EQ(a.ordinals(), b.ordinals());
    EXPECT_EQ(a.bucket_offsets(), b.bucket_offsets());
}

TEST(EnumerateWorkspace, BudgetExceeded) {
    try {
        enumerate_workspace(chain(5), 1e4);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("100000"), std::string::npos);
    }
}

TEST(KdTree, NearestMatchesLinearScan) {
    std::mt19937_64 rng(23);
    for (int n : {2, 3, 4}) {
        const auto index = enumerate_workspace(chain(n));
        const auto [lo, hi] = oracle::bounding_box(index.points());
        const Eigen::Vector3d pad = Eigen::Vector3d::Constant(10.0);
        for (int t = 0; t < 1000; ++t) {
            const auto q = oracle::random_in_box(rng, lo - pad, hi + pad);
            ASSERT_EQ(knn_query(index, q).point_index, oracle::nearest_linear(index.points(), q));
        }
    }
}

TEST(KdTree, QueryDistanceNotExceededByAnyStoredPoint) {
    const auto index = enumerate_workspace(chain(3));
    std::mt19937_64 rng(29);
    const auto [lo, hi] = oracle::bounding_box(index.points());
    for (int t = 0; t < 200; ++t) {
        const auto q = oracle::random_in_box(rng, lo, hi);
        const double best = KdTree::squared_distance(q, knn_query(index, q).position);
        for (const auto& p : index.points()) ASSERT_LE(best, KdTree::squared_distance(q, p));
    }
}

TEST(KdTree, KNearestMatchesSort) {
    std::mt19937_64 rng(31);
    std::vector<Eigen::Vector3d> pts;
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 500; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const KdTree tree(pts);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Vector3d q(u(rng), u(rng), u(rng));
        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) {
            const double da = oracle::sq(pts[a], q), db = oracle::sq(pts[b], q);
            return da < db || (da == db && a < b);
        });
        order.resize(7);
        EXPECT_EQ(tree.k_nearest(q, 7), order);
    }
}

TEST(KnnQuery, ExactPointReturnsFullBucket) {
    const auto index = enumerate_workspace(chain(3));
    for (std::size_t i = 0; i < index.point_count(); i += 37) {
        const auto r = knn_query(index, index.point(i));
        EXPECT_EQ(r.point_index, i);
        EXPECT_EQ(r.configurations, index.bucket(i));
    }
}

TEST(KnnQuery, EquidistantTieGoesToSmallerKey) {
    const WorkspaceIndex index(1, 2, {Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 0, 0)}, {0, 1, 2}, {0, 1});
    for (int run = 0; run < 3; ++run) {
        EXPECT_EQ(knn_query(index, Eigen::Vector3d(0, 0, 0)).point_index, 0u);
        EXPECT_EQ(knn_query(index, Eigen::Vector3d(0, 5, -2)).point_index, 0u);
    }
    // Many symmetric points around the origin: the smallest key always wins.
    std::vector<Eigen::Vector3d> ring;
    for (int s : {-1, 1})
        for (int a = 0; a < 3; ++a) {
            Eigen::Vector3d p = Eigen::Vector3d::Zero();
            p[a] = 2.0 * s;
            ring.push_back(p);
        }
    std::sort(ring.begin(), ring.end(), [](auto& a, auto& b) { return PositionKey::from(a) < PositionKey::from(b); });
    std::vector<std::uint64_t> offsets{0}, ordinals;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        ordinals.push_back(i);
        offsets.push_back(i + 1);
    }
    const WorkspaceIndex six(1, 6, ring, offsets, ordinals);
    EXPECT_EQ(knn_query(six, Eigen::Vector3d::Zero()).point_index, 0u);
    EXPECT_EQ(six.point(0), Eigen::Vector3d(-2, 0, 0));
}

TEST(KnnQuery, EmptyIndexThrows) {
    const WorkspaceIndex empty;
    EXPECT_THROW(knn_query(empty, Eigen::Vector3d::Zero()), DomainError);
    EXPECT_THROW(reach_accuracy(empty, std::vector<Eigen::Vector3d>{{0, 0, 0}}), DomainError);
}

TEST(ReachAccuracy, Cases) {
    const auto index = enumerate_workspace(chain(3));
    EXPECT_EQ(reach_accuracy(index, index.points()), 0.0);

    const WorkspaceIndex origin(1, 2, {Eigen::Vector3d::Zero()}, {0, 2}, {0, 1});
    EXPECT_DOUBLE_EQ(reach_accuracy(origin, std::vector<Eigen::Vector3d>{{3, 4, 0}}), 5.0);

    std::mt19937_64 rng(37);
    const auto [lo, hi] = oracle::bounding_box(index.points());
    std::vector<Eigen::Vector3d> queries;
    for (int i = 0; i < 300; ++i) queries.push_back(oracle::random_in_box(rng, lo, hi));
    double brute = 0.0;
    for (const auto& q : queries) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : index.points()) best = std::min(best, (p - q).norm());
        brute = std::max(brute, best);
    }
    EXPECT_NEAR(reach_accuracy(index, queries), brute, 1e-12);
}

TEST(Omnivariance, UnitCube) {
    std::vector<Eigen::Vector3d> cube;
    for (int x : {0, 1})
        for (int y : {0, 1})
            for (int z : {0, 1}) cube.emplace_back(x, y, z);
    EXPECT_NEAR(omnivariance(cube), 0.25, 1e-12);
}

TEST(Omnivariance, PlanarCloudIsZero) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), o(u(rng), u(rng), u(rng));
        std::vector<Eigen::Vector3d> pts;
        for (int i = 0; i < 100; ++i) pts.push_back(o + u(rng) / 50 * a + u(rng) / 50 * b);
        EXPECT_NEAR(omnivariance(pts), 0.0, 1e-10);
    }
}

TEST(Omnivariance, ScalesQuadratically) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), 2 * u(rng), 0.5 * u(rng));
    const double base = omnivariance(pts);
    for (double s : {0.1, 3.0, 17.0}) {
        std::vector<Eigen::Vector3d> scaled;
        for (const auto& p : pts) scaled.push_back(s * p);
        EXPECT_NEAR(omnivariance(scaled) / (s * s * base), 1.0, 1e-10);
    }
}

TEST(Omnivariance, DegenerateInput) {
    EXPECT_THROW(omnivariance(std::vector<Eigen::Vector3d>{{1, 2, 3}}), DomainError);
    EXPECT_THROW(omnivariance(std::vector<Eigen::Vector3d>{{1, 2, 3}, {1, 2, 3}}), DomainError);
}

TEST(Omnivariance, LocalNeighbourhoods) {
    const auto index = enumerate_workspace(chain(3));
    const auto local = local_omnivariance(index, 12);
    ASSERT_EQ(local.size(), index.point_count());
    for (double v : local) EXPECT_GE(v, 0.0);
    EXPECT_GT(omnivariance(index.points()), 0.0);
}

TEST(IndexFile, RoundTrip) {
    const auto d = chain(3);
    const auto index = enumerate_workspace(d);
    const auto bytes = encode_index(index, workspace_hash(d));
    ASSERT_EQ(bytes.substr(0, 4), "PLCW");
    EXPECT_EQ(bytes[4], 1);  // version, little-endian
    EXPECT_EQ(bytes[8], 3);  // segment count
    EXPECT_EQ(bytes[12], 10);
    const auto back = decode_index(bytes);
    EXPECT_EQ(back.description_hash, workspace_hash(d));
    ASSERT_EQ(back.index.point_count(), index.point_count());
    for (std::size_t i = 0; i < index.point_count(); ++i) EXPECT_TRUE(back.index.point(i) == index.point(i));
    EXPECT_EQ(back.index.ordinals(), index.ordinals());
    EXPECT_EQ(back.index.bucket_offsets(), index.bucket_offsets());
}

TEST(IndexFile, RejectsCorruptInput) {
    const auto d = chain(2);
    auto bytes = encode_index(enumerate_workspace(d), workspace_hash(d));
    EXPECT_THROW(decode_index("PLCX" + bytes.substr(4)), IoError);
    EXPECT_THROW(decode_index(bytes.substr(0, bytes.size() - 3)), IoError);
    EXPECT_THROW(decode_index(bytes + "x"), IoError);
    auto wrong_version = bytes;
    wrong_version[4] = 9;
    EXPECT_THROW(decode_index(wrong_version), IoError);
}

TEST(IndexFile, HashTracksKinematicFieldsOnly) {
    RobotDescription a, b;
    b.youngs_modulus = 130;
    EXPECT_EQ(workspace_hash(a), workspace_hash(b));
    b.bend_angle = deg_to_rad(31);
    EXPECT_NE(workspace_hash(a), workspace_hash(b));
}
