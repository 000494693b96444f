#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <json.hpp>

#include "plc/error.hpp"

namespace plc {

inline constexpr double kPi = std::numbers::pi;

/// Default cap on tooth_count^segment_count accepted by the parser and the enumerator.
inline constexpr double kDefaultEnumerationBudget = 1e8;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

/// Inverse of deg_to_rad, nudged by a few ulps so that deg_to_rad(rad_to_deg(r)) == r
/// whenever r itself came from deg_to_rad.
inline double rad_to_deg(double rad) {
    const double guess = rad * (180.0 / kPi);
    if (deg_to_rad(guess) == rad) return guess;
    double up = guess;
    double down = guess;
    for (int i = 0; i < 8; ++i) {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        if (deg_to_rad(up) == rad) return up;
        if (deg_to_rad(down) == rad) return down;
    }
    return guess;
}

/// Angle of tooth position k on a ring with tooth_count teeth.
constexpr double tooth_angle(int k, int tooth_count) {
    return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(tooth_count);
}

// ---------------------------------------------------------------------------
// RigidTransform
// ---------------------------------------------------------------------------

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
        return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
    }

    Eigen::Matrix4d homogeneous() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }

    /// Largest entry of |RᵀR − I|.
    double orthonormality_error() const {
        return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    }
};

// ---------------------------------------------------------------------------
// RobotDescription
// ---------------------------------------------------------------------------

/// Geometry, material, tendon and discretization parameters of a chain of
/// identical inclined locking units. Lengths in mm, moduli in MPa (N/mm²),
/// angles in radians.
struct RobotDescription {
    int segment_count = 5;
    double curve_length = 30.0;
    double bend_angle = deg_to_rad(30.0);
    int tooth_count = 10;
    double youngs_modulus = 115.0;
    double poisson_ratio = 0.35;
    double spine_outer_diameter = 8.0;
    double spine_inner_diameter = 2.0;
    double skin_outer_diameter = 22.0;
    double skin_inner_diameter = 17.0;
    double skin_thickness = 0.5;
    int skin_convolutions = 6;
    double tendon_anchor_radius = 6.0;
    double lever_arm = 20.0;
    double tendon_stiffness = 0.85;
    Eigen::Vector3d tool_offset = Eigen::Vector3d::Zero();

    /// G = E / (2(1 + ν)).
    double shear_modulus() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }

    /// tooth_count^segment_count as a double (may exceed any integer type).
    double configuration_count() const {
        return std::pow(static_cast<double>(tooth_count), static_cast<double>(segment_count));
    }

    friend bool operator==(const RobotDescription& a, const RobotDescription& b) {
        return a.segment_count == b.segment_count && a.curve_length == b.curve_length &&
               a.bend_angle == b.bend_angle && a.tooth_count == b.tooth_count &&
               a.youngs_modulus == b.youngs_modulus && a.poisson_ratio == b.poisson_ratio &&
               a.spine_outer_diameter == b.spine_outer_diameter &&
               a.spine_inner_diameter == b.spine_inner_diameter &&
               a.skin_outer_diameter == b.skin_outer_diameter &&
               a.skin_inner_diameter == b.skin_inner_diameter &&
               a.skin_thickness == b.skin_thickness && a.skin_convolutions == b.skin_convolutions &&
               a.tendon_anchor_radius == b.tendon_anchor_radius && a.lever_arm == b.lever_arm &&
               a.tendon_stiffness == b.tendon_stiffness && a.tool_offset == b.tool_offset;
    }
};

/// The prototype robot: five units, ten teeth per ring.
inline RobotDescription default_robot() { return RobotDescription{}; }

inline double tooth_pitch(const RobotDescription& desc) {
    return 2.0 * kPi / static_cast<double>(desc.tooth_count);
}

/// Throws InvariantError naming the first violated constraint.
inline void validate(const RobotDescription& d, double enumeration_budget = kDefaultEnumerationBudget) {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw InvariantError(msg);
    };
    require(d.segment_count >= 1, "segment_count must be >= 1");
    require(d.tooth_count >= 2, "tooth_count must be >= 2");
    require(d.skin_convolutions >= 1, "skin_convolutions must be >= 1");
    require(d.curve_length > 0, "curve_length must be > 0");
    require(d.spine_outer_diameter > 0, "spine_outer_diameter must be > 0");
    require(d.spine_inner_diameter > 0, "spine_inner_diameter must be > 0");
    require(d.skin_outer_diameter > 0, "skin_outer_diameter must be > 0");
    require(d.skin_inner_diameter > 0, "skin_inner_diameter must be > 0");
    require(d.skin_thickness > 0, "skin_thickness must be > 0");
    require(d.tendon_anchor_radius > 0, "tendon_anchor_radius must be > 0");
    require(d.lever_arm > 0, "lever_arm must be > 0");
    require(d.tendon_stiffness > 0, "tendon_stiffness must be > 0");
    require(d.youngs_modulus > 0, "youngs_modulus must be > 0");
    require(d.spine_inner_diameter < d.spine_outer_diameter,
            "spine inner diameter must be < outer diameter");
    require(d.skin_inner_diameter < d.skin_outer_diameter,
            "skin inner diameter must be < outer diameter");
    require(d.skin_thickness < d.skin_inner_diameter / 2.0,
            "skin_thickness must be < half the skin inner diameter");
    require(d.bend_angle > 0 && d.bend_angle < kPi / 2, "bend_angle must lie in (0, 90) degrees");
    require(d.poisson_ratio > 0 && d.poisson_ratio < 0.5, "poisson_ratio must lie in (0, 0.5)");
    require(d.tool_offset.allFinite(), "tool_offset must be finite");
    if (d.configuration_count() > enumeration_budget) {
        throw InvariantError("tooth_count^segment_count = " + std::to_string(d.configuration_count()) +
                             " exceeds the enumeration budget of " + std::to_string(enumeration_budget));
    }
}

namespace detail {

inline const nlohmann::json* find_field(const nlohmann::json& doc, std::string_view name) {
    auto it = doc.find(name);
    return it == doc.end() ? nullptr : &*it;
}

inline void read_number(const nlohmann::json& doc, const char* name, double& out) {
    if (const auto* v = find_field(doc, name)) {
        if (!v->is_number()) throw SchemaError(name, "expected a number");
        out = v->get<double>();
        if (!std::isfinite(out)) throw SchemaError(name, "expected a finite number");
    }
}

inline void read_integer(const nlohmann::json& doc, const char* name, int& out) {
    if (const auto* v = find_field(doc, name)) {
        if (!v->is_number_integer()) throw SchemaError(name, "expected an integer");
        const auto raw = v->get<std::int64_t>();
        if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max())
            throw SchemaError(name, "integer out of range");
        out = static_cast<int>(raw);
    }
}

inline constexpr std::string_view kFieldNames[] = {
    "segment_count",        "curve_length",         "bend_angle",          "tooth_count",
    "youngs_modulus",       "poisson_ratio",        "spine_outer_diameter", "spine_inner_diameter",
    "skin_outer_diameter",  "skin_inner_diameter",  "skin_thickness",      "skin_convolutions",
    "tendon_anchor_radius", "lever_arm",            "tendon_stiffness",    "tool_offset",
};

}  // namespace detail

/// Parses a JSON robot-description document. Missing fields keep their
/// defaults; bend_angle is read in degrees.
inline RobotDescription parse_robot_description(std::string_view text,
                                                double enumeration_budget = kDefaultEnumerationBudget) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("<document>", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("<document>", "expected a JSON object");

    for (const auto& [key, _] : doc.items()) {
        if (std::find(std::begin(detail::kFieldNames), std::end(detail::kFieldNames), key) ==
            std::end(detail::kFieldNames))
            throw SchemaError(key, "unknown field");
    }

    RobotDescription d;
    detail::read_integer(doc, "segment_count", d.segment_count);
    detail::read_number(doc, "curve_length", d.curve_length);
    double bend_deg = rad_to_deg(d.bend_angle);
    detail::read_number(doc, "bend_angle", bend_deg);
    d.bend_angle = deg_to_rad(bend_deg);
    detail::read_integer(doc, "tooth_count", d.tooth_count);
    detail::read_number(doc, "youngs_modulus", d.youngs_modulus);
    detail::read_number(doc, "poisson_ratio", d.poisson_ratio);
    detail::read_number(doc, "spine_outer_diameter", d.spine_outer_diameter);
    detail::read_number(doc, "spine_inner_diameter", d.spine_inner_diameter);
    detail::read_number(doc, "skin_outer_diameter", d.skin_outer_diameter);
    detail::read_number(doc, "skin_inner_diameter", d.skin_inner_diameter);
    detail::read_number(doc, "skin_thickness", d.skin_thickness);
    detail::read_integer(doc, "skin_convolutions", d.skin_convolutions);
    detail::read_number(doc, "tendon_anchor_radius", d.tendon_anchor_radius);
    detail::read_number(doc, "lever_arm", d.lever_arm);
    detail::read_number(doc, "tendon_stiffness", d.tendon_stiffness);
    if (const auto* v = detail::find_field(doc, "tool_offset")) {
        if (!v->is_array() || v->size() != 3) throw SchemaError("tool_offset", "expected an array of 3 numbers");
        for (int i = 0; i < 3; ++i) {
            if (!(*v)[i].is_number()) throw SchemaError("tool_offset", "expected an array of 3 numbers");
            d.tool_offset[i] = (*v)[i].get<double>();
        }
    }

    validate(d, enumeration_budget);
    return d;
}

/// Writes every field; parse_robot_description(serialize_robot_description(d)) == d.
inline std::string serialize_robot_description(const RobotDescription& d) {
    nlohmann::ordered_json doc;
    doc["segment_count"] = d.segment_count;
    doc["curve_length"] = d.curve_length;
    doc["bend_angle"] = rad_to_deg(d.bend_angle);
    doc["tooth_count"] = d.tooth_count;
    doc["youngs_modulus"] = d.youngs_modulus;
    doc["poisson_ratio"] = d.poisson_ratio;
    doc["spine_outer_diameter"] = d.spine_outer_diameter;
    doc["spine_inner_diameter"] = d.spine_inner_diameter;
    doc["skin_outer_diameter"] = d.skin_outer_diameter;
    doc["skin_inner_diameter"] = d.skin_inner_diameter;
    doc["skin_thickness"] = d.skin_thickness;
    doc["skin_convolutions"] = d.skin_convolutions;
    doc["tendon_anchor_radius"] = d.tendon_anchor_radius;
    doc["lever_arm"] = d.lever_arm;
    doc["tendon_stiffness"] = d.tendon_stiffness;
    doc["tool_offset"] = {d.tool_offset.x(), d.tool_offset.y(), d.tool_offset.z()};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Joint angles stored as integer tooth indices k, angle = 2πk/N.
class Configuration {
public:
    Configuration() = default;

    Configuration(std::vector<int> indices, int tooth_count)
        : indices_(std::move(indices)), tooth_count_(tooth_count) {
        if (tooth_count_ < 2) throw InvariantError("tooth_count must be >= 2");
        for (int k : indices_) {
            if (k < 0 || k >= tooth_count_)
                throw InvariantError("tooth index " + std::to_string(k) + " outside [0, " +
                                     std::to_string(tooth_count_) + ")");
        }
    }

    static Configuration zeros(int segment_count, int tooth_count) {
        return Configuration(std::vector<int>(static_cast<std::size_t>(segment_count), 0), tooth_count);
    }

    /// Decodes a mixed-radix ordinal with joint 0 as the most significant digit.
    static Configuration from_ordinal(std::uint64_t ordinal, int segment_count, int tooth_count) {
        std::vector<int> idx(static_cast<std::size_t>(segment_count));
        const auto base = static_cast<std::uint64_t>(tooth_count);
        for (int j = segment_count - 1; j >= 0; --j) {
            idx[static_cast<std::size_t>(j)] = static_cast<int>(ordinal % base);
            ordinal /= base;
        }
        Configuration c;
        c.indices_ = std::move(idx);
        c.tooth_count_ = tooth_count;
        return c;
    }

    std::uint64_t ordinal() const {
        std::uint64_t o = 0;
        for (int k : indices_) o = o * static_cast<std::uint64_t>(tooth_count_) + static_cast<std::uint64_t>(k);
        return o;
    }

    std::size_t size() const noexcept { return indices_.size(); }
    int tooth_count() const noexcept { return tooth_count_; }
    std::span<const int> indices() const noexcept { return indices_; }
    int index(std::size_t joint) const { return indices_.at(joint); }

    double angle(std::size_t joint) const { return tooth_angle(indices_.at(joint), tooth_count_); }

    std::vector<double> angles() const {
        std::vector<double> out(indices_.size());
        for (std::size_t j = 0; j < indices_.size(); ++j) out[j] = tooth_angle(indices_[j], tooth_count_);
        return out;
    }

    /// Returns a copy with joint `joint` moved by `pitches` teeth (wrapping).
    Configuration rotated(std::size_t joint, int pitches) const {
        Configuration c = *this;
        const int n = tooth_count_;
        c.indices_.at(joint) = ((c.indices_[joint] + pitches) % n + n) % n;
        return c;
    }

    bool valid_for(const RobotDescription& desc) const {
        return tooth_count_ == desc.tooth_count && indices_.size() == static_cast<std::size_t>(desc.segment_count);
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend auto operator<=>(const Configuration& a, const Configuration& b) {
        return a.indices_ <=> b.indices_;
    }

private:
    std::vector<int> indices_;
    int tooth_count_ = 0;
};

/// Throws InvariantError unless `config` matches the description's joint count and tooth count.
inline void require_valid(const Configuration& config, const RobotDescription& desc) {
    if (!config.valid_for(desc)) {
        throw InvariantError("configuration has " + std::to_string(config.size()) + " joints / " +
                             std::to_string(config.tooth_count()) + " teeth, robot expects " +
                             std::to_string(desc.segment_count) + " / " + std::to_string(desc.tooth_count));
    }
}

}  // namespace plc
