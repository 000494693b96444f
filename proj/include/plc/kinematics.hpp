#pragma once

#include <cmath>
#include <vector>

#include "plc/model.hpp"

namespace plc {

/// Pose of one unit inside a chain.
struct SegmentPose {
    RigidTransform local;  ///< distal frame of unit i expressed in the frame of unit i-1
    RigidTransform world;  ///< distal frame of unit i expressed in the base frame
    Eigen::Vector3d axis;  ///< unit axial direction at the base of unit i, base frame
};

struct ChainPose {
    RigidTransform end;
    std::vector<SegmentPose> segments;
};

inline Eigen::Matrix3d rot_z(double a) {
    return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

inline Eigen::Matrix3d rot_y(double a) {
    return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

/// Constant-curvature transform of one inclined unit rotated by q about its base z-axis.
inline RigidTransform segment_transform(const RobotDescription& desc, double q) {
    const double beta = desc.bend_angle;
    if (beta == 0.0) throw DomainError("degenerate straight unit: bend_angle must be non-zero");
    const double radius = desc.curve_length / beta;
    const double cq = std::cos(q), sq = std::sin(q);
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double planar = radius * (1.0 - cb);

    RigidTransform t;
    t.translation = {planar * cq, planar * sq, radius * sb};
    // RotZ(q) * RotY(beta), written out.
    t.rotation << cq * cb, -sq, cq * sb,
                  sq * cb,  cq, sq * sb,
                  -sb,     0.0, cb;
    return t;
}

/// Forward kinematics of the whole chain plus every intermediate frame.
inline ChainPose chain_pose(const RobotDescription& desc, const Configuration& config) {
    require_valid(config, desc);
    ChainPose out;
    out.segments.reserve(config.size());
    RigidTransform acc;
    for (std::size_t i = 0; i < config.size(); ++i) {
        SegmentPose seg;
        seg.axis = acc.rotation.col(2);
        seg.local = segment_transform(desc, config.angle(i));
        acc = acc * seg.local;
        seg.world = acc;
        out.segments.push_back(std::move(seg));
    }
    out.end = acc;
    return out;
}

/// End-effector position only; cheaper than chain_pose.
inline Eigen::Vector3d end_position(const RobotDescription& desc, const Configuration& config) {
    require_valid(config, desc);
    RigidTransform acc;
    for (std::size_t i = 0; i < config.size(); ++i) acc = acc * segment_transform(desc, config.angle(i));
    return acc.translation;
}

inline Eigen::Vector3d tool_tip(const RigidTransform& end_pose, const Eigen::Vector3d& tool_offset) {
    return end_pose.rotation * tool_offset + end_pose.translation;
}

}  // namespace plc
