#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "plc/model.hpp"

namespace plc {

/// Tendon lock flags plus current joint angles.
struct JointState {
    std::vector<bool> locked;
    Configuration angles;

    static JointState all_locked(const Configuration& angles) {
        return {std::vector<bool>(angles.size(), true), angles};
    }

    std::size_t unlocked_count() const {
        return static_cast<std::size_t>(std::count(locked.begin(), locked.end(), false));
    }

    friend bool operator==(const JointState&, const JointState&) = default;
};

/// One actuator command. Joints are 0-based; shaft rotation is stored in
/// whole tooth pitches so it is always a pitch multiple.
struct ActuationStep {
    enum class Kind { Unlock, Lock, RotateShaft };

    Kind kind;
    int joint = -1;
    int pitches = 0;

    static ActuationStep unlock(int joint) { return {Kind::Unlock, joint, 0}; }
    static ActuationStep lock(int joint) { return {Kind::Lock, joint, 0}; }
    static ActuationStep rotate(int pitches) { return {Kind::RotateShaft, -1, pitches}; }

    double rotation(int tooth_count) const { return tooth_angle(pitches, tooth_count); }

    friend bool operator==(const ActuationStep&, const ActuationStep&) = default;
};

inline JointState simulate_step(const JointState& state, const ActuationStep& step) {
    JointState next = state;
    switch (step.kind) {
        case ActuationStep::Kind::Unlock:
        case ActuationStep::Kind::Lock: {
            if (step.joint < 0 || static_cast<std::size_t>(step.joint) >= state.locked.size())
                throw DomainError("joint " + std::to_string(step.joint) + " does not exist");
            next.locked[static_cast<std::size_t>(step.joint)] = step.kind == ActuationStep::Kind::Lock;
            return next;
        }
        case ActuationStep::Kind::RotateShaft: {
            if (state.unlocked_count() != 1) throw DomainError("rotation requires exactly one loosened joint");
            const auto j = static_cast<std::size_t>(
                std::find(state.locked.begin(), state.locked.end(), false) - state.locked.begin());
            // Everything above the loose joint turns with the shaft: only q_j changes.
            next.angles = state.angles.rotated(j, step.pitches);
            return next;
        }
    }
    throw DomainError("unknown actuation step");
}

/// Shortest signed tooth delta from `from` to `to` on a ring of `teeth`; half turns go positive.
inline int shortest_delta(int from, int to, int teeth) {
    int d = ((to - from) % teeth + teeth) % teeth;
    if (2 * d > teeth) d -= teeth;
    return d;
}

/// Base-to-tip unlock / rotate / lock triples for every joint that differs.
inline std::vector<ActuationStep> plan_to(const RobotDescription& desc, const Configuration& start,
                                          const Configuration& goal) {
    require_valid(start, desc);
    require_valid(goal, desc);
    std::vector<ActuationStep> plan;
    for (std::size_t j = 0; j < start.size(); ++j) {
        const int delta = shortest_delta(start.index(j), goal.index(j), desc.tooth_count);
        if (delta == 0) continue;
        plan.push_back(ActuationStep::unlock(static_cast<int>(j)));
        plan.push_back(ActuationStep::rotate(delta));
        plan.push_back(ActuationStep::lock(static_cast<int>(j)));
    }
    return plan;
}

/// Runs a schedule from `initial`, returning every intermediate state (initial first).
inline std::vector<JointState> execute(const JointState& initial, const std::vector<ActuationStep>& plan) {
    std::vector<JointState> trace{initial};
    for (const auto& step : plan) trace.push_back(simulate_step(trace.back(), step));
    return trace;
}

}  // namespace plc
