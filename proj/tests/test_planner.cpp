#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "plc/planner.hpp"

using namespace plc;

TEST(Planner, ShortestDelta) {
    EXPECT_EQ(shortest_delta(0, 2, 10), 2);
    EXPECT_EQ(shortest_delta(0, 8, 10), -2);
    EXPECT_EQ(shortest_delta(9, 0, 10), 1);
    EXPECT_EQ(shortest_delta(0, 5, 10), 5);
    EXPECT_EQ(shortest_delta(5, 0, 10), 5);
    EXPECT_EQ(shortest_delta(3, 3, 10), 0);
}

TEST(Planner, LockIsIdempotent) {
    const auto s = JointState::all_locked(Configuration::zeros(3, 10));
    EXPECT_EQ(simulate_step(s, ActuationStep::lock(1)), s);
}

TEST(Planner, UnlockRotateLockTurnsOneJoint) {
    const auto s0 = JointState::all_locked(Configuration::zeros(3, 10));
    const auto trace = execute(s0, {ActuationStep::unlock(1), ActuationStep::rotate(2), ActuationStep::lock(1)});
    ASSERT_EQ(trace.size(), 4u);
    EXPECT_EQ(trace[1].unlocked_count(), 1u);
    EXPECT_EQ(trace.back().angles, Configuration({0, 2, 0}, 10));
    EXPECT_NEAR(rad_to_deg(trace.back().angles.angle(1)), 72.0, 1e-12);
    EXPECT_TRUE(trace.back().locked == std::vector<bool>(3, true));
    EXPECT_NEAR(rad_to_deg(ActuationStep::rotate(2).rotation(10)), 72.0, 1e-12);
}

TEST(Planner, RotationNeedsExactlyOneLooseJoint) {
    const auto s = JointState::all_locked(Configuration::zeros(3, 10));
    try {
        simulate_step(s, ActuationStep::rotate(1));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "rotation requires exactly one loosened joint");
    }
    const auto two = execute(s, {ActuationStep::unlock(0), ActuationStep::unlock(2)}).back();
    EXPECT_THROW(simulate_step(two, ActuationStep::rotate(1)), DomainError);
    EXPECT_THROW(simulate_step(s, ActuationStep::unlock(3)), DomainError);
}

TEST(Planner, SameStartAndGoalNeedsNoSteps) {
    const auto d = default_robot();
    const Configuration c({1, 2, 3, 4, 5}, 10);
    EXPECT_TRUE(plan_to(d, c, c).empty());
}

TEST(Planner, SingleJointChange) {
    const auto d = default_robot();
    const auto plan = plan_to(d, Configuration::zeros(5, 10), Configuration({0, 0, 9, 0, 0}, 10));
    ASSERT_EQ(plan.size(), 3u);
    EXPECT_EQ(plan[0], ActuationStep::unlock(2));
    EXPECT_EQ(plan[1], ActuationStep::rotate(-1));
    EXPECT_EQ(plan[2], ActuationStep::lock(2));
}

TEST(Planner, RandomPlansAreSound) {
    RobotDescription d;
    d.segment_count = 7;
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto start = oracle::random_configuration(rng, 7, 10);
        const auto goal = oracle::random_configuration(rng, 7, 10);
        const auto plan = plan_to(d, start, goal);
        const auto trace = execute(JointState::all_locked(start), plan);
        EXPECT_EQ(trace.back().angles, goal);
        EXPECT_EQ(trace.back().unlocked_count(), 0u);
        int budget = 0;
        for (const auto& s : trace) EXPECT_LE(s.unlocked_count(), 1u);
        for (const auto& step : plan) {
            if (step.kind != ActuationStep::Kind::RotateShaft) continue;
            const double pitches = step.rotation(10) / tooth_pitch(d);
            EXPECT_NEAR(pitches, std::round(pitches), 1e-12);
            EXPECT_NE(step.pitches, 0);
            EXPECT_LE(std::abs(step.pitches), 5);
            budget += std::abs(step.pitches);
        }
        int expected = 0;
        for (std::size_t j = 0; j < 7; ++j) {
            const int diff = std::abs(start.index(j) - goal.index(j));
            expected += std::min(diff, 10 - diff);
        }
        EXPECT_EQ(budget, expected);
        // The reverse schedule brings the chain back.
        EXPECT_EQ(execute(trace.back(), plan_to(d, goal, start)).back().angles, start);
    }
}

TEST(Planner, RejectsMismatchedConfigurations) {
    EXPECT_THROW(plan_to(default_robot(), Configuration::zeros(4, 10), Configuration::zeros(5, 10)), InvariantError);
}
