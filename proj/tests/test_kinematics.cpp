#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "plc/kinematics.hpp"

using namespace plc;

TEST(SegmentTransform, ZeroRotation) {
    const RobotDescription d;  // L = 30 mm, beta = 30 deg
    const auto t = segment_transform(d, 0.0);
    // L/beta (1 - cos beta) and L/beta sin beta, evaluated independently.
    EXPECT_NEAR(t.translation.x(), 7.676178925121034, 1e-12);
    EXPECT_NEAR(t.translation.x(), 7.675, 2e-3);
    EXPECT_EQ(t.translation.y(), 0.0);
    EXPECT_NEAR(t.translation.z(), 28.64788975654116, 1e-12);

    const double cb = std::cos(d.bend_angle), sb = std::sin(d.bend_angle);
    Eigen::Matrix3d roty;
    roty << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
    EXPECT_TRUE(t.rotation == roty);
}

TEST(SegmentTransform, HalfTurn) {
    const RobotDescription d;
    const auto t = segment_transform(d, kPi);
    EXPECT_NEAR(t.translation.x(), -7.676178925121034, 1e-12);
    EXPECT_NEAR(t.translation.y(), 0.0, 1e-12);
}

TEST(SegmentTransform, MatchesRotZRotY) {
    const RobotDescription d;
    for (double q : {0.3, 1.7, -2.2, 5.0}) {
        const auto t = segment_transform(d, q);
        EXPECT_TRUE(t.rotation.isApprox(rot_z(q) * rot_y(d.bend_angle), 1e-14));
        EXPECT_LT(t.orthonormality_error(), 1e-15);
        EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-14);
    }
}

TEST(SegmentTransform, StraightUnitRejected) {
    RobotDescription d;
    d.bend_angle = 0.0;
    EXPECT_THROW(segment_transform(d, 0.0), DomainError);
}

TEST(ChainPose, SingleSegmentEqualsSegmentTransform) {
    RobotDescription d;
    d.segment_count = 1;
    for (int k = 0; k < 10; ++k) {
        const Configuration c({k}, 10);
        const auto pose = chain_pose(d, c);
        const auto t = segment_transform(d, c.angle(0));
        EXPECT_TRUE(pose.end.rotation == t.rotation);
        EXPECT_TRUE(pose.end.translation == t.translation);
        EXPECT_TRUE(pose.segments[0].axis == Eigen::Vector3d::UnitZ());
    }
}

TEST(ChainPose, AllZeroStaysInXzPlane) {
    const RobotDescription d;
    const auto pose = chain_pose(d, Configuration::zeros(5, 10));
    for (const auto& seg : pose.segments) {
        EXPECT_NEAR(seg.world.translation.y(), 0.0, 1e-12);
        EXPECT_NEAR(seg.axis.y(), 0.0, 1e-12);
    }
}

TEST(ChainPose, IntermediateFramesComposeToEnd) {
    std::mt19937_64 rng(11);
    const RobotDescription d;
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::random_configuration(rng, 5, 10);
        const auto pose = chain_pose(d, c);
        RigidTransform acc;
        for (std::size_t i = 0; i < pose.segments.size(); ++i) {
            acc = acc * pose.segments[i].local;
            EXPECT_LT((acc.translation - pose.segments[i].world.translation).norm(), 1e-10);
        }
        EXPECT_LT((acc.translation - pose.end.translation).norm(), 1e-10);
        EXPECT_LT((pose.end.translation - oracle::fk_naive(d, c)).norm(), 1e-10);
        EXPECT_LT((end_position(d, c) - pose.end.translation).norm(), 0.0 + 1e-15);
    }
}

TEST(ChainPose, DistanceBoundedByArcLength) {
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 8; ++n) {
        RobotDescription d;
        d.segment_count = n;
        for (int trial = 0; trial < 200; ++trial) {
            const auto c = oracle::random_configuration(rng, n, 10);
            EXPECT_LE(end_position(d, c).norm(), n * d.curve_length + 1e-9);
        }
    }
}

TEST(ChainPose, BaseJointRotatesWholeChain) {
    std::mt19937_64 rng(13);
    const RobotDescription d;
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::random_configuration(rng, 5, 10);
        const int m = 1 + trial % 9;
        const auto rotated = c.rotated(0, m);
        const Eigen::Vector3d expected = rot_z(tooth_angle(m, 10)) * end_position(d, c);
        EXPECT_LT((end_position(d, rotated) - expected).norm(), 1e-10);
    }
}

TEST(ChainPose, OrthonormalityDriftAfterHundredUnits) {
    std::mt19937_64 rng(17);
    RobotDescription d;
    d.segment_count = 100;
    const auto c = oracle::random_configuration(rng, 100, 10);
    const auto pose = chain_pose(d, c);
    const double drift = pose.end.orthonormality_error();
    RecordProperty("orthonormality_drift_n100", std::to_string(drift));
    EXPECT_LT(drift, 1e-10);
    EXPECT_NEAR(pose.end.rotation.determinant(), 1.0, 1e-10);
    for (const auto& seg : pose.segments) EXPECT_NEAR(seg.axis.norm(), 1.0, 1e-12);
}

TEST(ChainPose, RejectsMismatchedConfiguration) {
    const RobotDescription d;
    EXPECT_THROW(chain_pose(d, Configuration::zeros(4, 10)), InvariantError);
    EXPECT_THROW(chain_pose(d, Configuration::zeros(5, 12)), InvariantError);
}

TEST(ToolTip, Cases) {
    RigidTransform t;
    t.rotation = rot_y(0.4) * rot_z(1.1);
    t.translation = {3, -2, 7};
    EXPECT_TRUE(tool_tip(t, Eigen::Vector3d::Zero()) == t.translation);
    EXPECT_TRUE(tool_tip(RigidTransform::identity(), {1, 2, 3}) == Eigen::Vector3d(1, 2, 3));

    RigidTransform r;
    r.rotation = rot_z(kPi / 2);
    r.translation = {10, 0, 0};
    EXPECT_LT((tool_tip(r, {1, 0, 0}) - Eigen::Vector3d(10, 1, 0)).norm(), 1e-15);
}
