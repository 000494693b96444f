#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "plc/kinematics.hpp"

namespace plc {

struct StiffnessOptions {
    /// Use the polar moment π(D⁴−d⁴)/32 in the bending term instead of the
    /// area moment π(D⁴−d⁴)/64. Only for sensitivity checks.
    bool literal_polar = false;
};

/// Force magnitude used for sampled stiffness maps, N.
inline constexpr double kMapForce = 50.0;

/// Cross-section constants of the hollow spine.
struct SpineSection {
    double area;         ///< A, mm²
    double bending;      ///< I used in the bending term, mm⁴
    double polar;        ///< J, mm⁴

    static SpineSection of(const RobotDescription& d, const StiffnessOptions& opt = {}) {
        const double od = d.spine_outer_diameter, id = d.spine_inner_diameter;
        const double area_moment = std::numbers::pi * (std::pow(od, 4) - std::pow(id, 4)) / 64.0;
        SpineSection s;
        s.area = std::numbers::pi * (od * od - id * id) / 4.0;
        s.polar = 2.0 * area_moment;
        s.bending = opt.literal_polar ? s.polar : area_moment;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Firmed state
// ---------------------------------------------------------------------------

/// Bending plus axial strain energy of one unit loaded by `force` at its tip, N·mm.
inline double segment_strain_energy(const RobotDescription& desc, const Eigen::Vector3d& axis,
                                    const Eigen::Vector3d& force, const StiffnessOptions& opt = {}) {
    const SpineSection s = SpineSection::of(desc, opt);
    const double L = desc.curve_length, E = desc.youngs_modulus;
    const double axial = axis.dot(force);
    const double bending = (force.squaredNorm() - axial * axial) * L * L * L / (6.0 * E * s.bending);
    const double normal = axial * axial * L / (2.0 * E * s.area);
    return bending + normal;
}

/// Maps a tip force (N) to a tip displacement (mm).
struct ComplianceMatrix {
    Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();

    Eigen::Vector3d displacement(const Eigen::Vector3d& force) const { return matrix * force; }

    double asymmetry() const { return (matrix - matrix.transpose()).cwiseAbs().maxCoeff(); }

    /// Eigenvalues in ascending order.
    Eigen::Vector3d eigenvalues() const {
        const Eigen::Matrix3d sym = 0.5 * (matrix + matrix.transpose());
        return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(sym, Eigen::EigenvaluesOnly).eigenvalues();
    }

    Eigen::Matrix3d stiffness() const { return matrix.inverse(); }
};

/// Σ_i [L vvᵀ/(EA) + L³/(3EI)(I − vvᵀ)] over the given unit axes.
inline ComplianceMatrix compliance_from_axes(const RobotDescription& desc, std::span<const Eigen::Vector3d> axes,
                                             const StiffnessOptions& opt = {}) {
    const SpineSection s = SpineSection::of(desc, opt);
    const double L = desc.curve_length, E = desc.youngs_modulus;
    const double axial = L / (E * s.area);
    const double transverse = L * L * L / (3.0 * E * s.bending);
    ComplianceMatrix k;
    for (const auto& v : axes) {
        const Eigen::Matrix3d vv = v * v.transpose();
        k.matrix += axial * vv + transverse * (Eigen::Matrix3d::Identity() - vv);
    }
    return k;
}

/// Tip compliance of the locked chain; every unit carries the same tip force.
inline ComplianceMatrix firmed_compliance(const RobotDescription& desc, const Configuration& config,
                                          const StiffnessOptions& opt = {}) {
    const ChainPose pose = chain_pose(desc, config);
    std::vector<Eigen::Vector3d> axes;
    axes.reserve(pose.segments.size());
    for (const auto& seg : pose.segments) axes.push_back(seg.axis);
    return compliance_from_axes(desc, axes, opt);
}

/// |δ|/|F| along `direction`, mm/N.
inline double directional_compliance(const ComplianceMatrix& k, const Eigen::Vector3d& direction) {
    return (k.matrix * direction).norm();
}

/// |F|/|δ| along `direction`, N/mm.
inline double directional_stiffness(const ComplianceMatrix& k, const Eigen::Vector3d& direction) {
    return 1.0 / directional_compliance(k, direction);
}

inline double directional_stiffness(const RobotDescription& desc, const Configuration& config,
                                    const Eigen::Vector3d& direction, const StiffnessOptions& opt = {}) {
    if (std::abs(direction.norm() - 1.0) > 1e-9) throw DomainError("direction must be a unit vector");
    return directional_stiffness(firmed_compliance(desc, config, opt), direction);
}

/// Evenly spread unit vectors on the sphere (golden-angle spiral).
inline std::vector<Eigen::Vector3d> fibonacci_sphere(int samples) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(samples));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < samples; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / samples;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return out;
}

struct DirectionalSample {
    Eigen::Vector3d direction;
    Eigen::Vector3d displacement;  ///< tip displacement under force_magnitude·direction, mm
    double stiffness;              ///< N/mm
    double compliance;             ///< mm/N
};

inline std::vector<DirectionalSample> stiffness_map(const RobotDescription& desc, const Configuration& config,
                                                    int sphere_samples, double force_magnitude = kMapForce,
                                                    const StiffnessOptions& opt = {}) {
    if (sphere_samples < 6) throw DomainError("stiffness map needs at least 6 sphere samples");
    const ComplianceMatrix k = firmed_compliance(desc, config, opt);
    std::vector<DirectionalSample> out;
    for (const auto& u : fibonacci_sphere(sphere_samples)) {
        const double c = directional_compliance(k, u);
        out.push_back({u, k.displacement(force_magnitude * u), 1.0 / c, c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loosening
// ---------------------------------------------------------------------------

/// External force at which the locking-ring lever opens, N. Two tendons at
/// ±anchor_radius resist about the fulcrum; the load acts lever_arm above it.
inline double loosening_threshold(const RobotDescription& desc, double tension) {
    if (tension < 0.0) throw DomainError("tendon tension must be >= 0");
    return 2.0 * desc.tendon_anchor_radius * tension / desc.lever_arm;
}

/// Piecewise-linear force/deflection law: firm slope up to the threshold,
/// tendon slope beyond it.
struct ForceDeflectionCurve {
    double threshold_force;        ///< N
    double firm_slope;             ///< N/mm
    double loose_slope;            ///< N/mm
    double breakpoint_deflection;  ///< mm

    double deflection_at(double force) const {
        if (force <= threshold_force) return force / firm_slope;
        return breakpoint_deflection + (force - threshold_force) / loose_slope;
    }

    double force_at(double deflection) const {
        if (deflection <= breakpoint_deflection) return deflection * firm_slope;
        return threshold_force + (deflection - breakpoint_deflection) * loose_slope;
    }

    bool loosened_at(double force) const { return force > threshold_force; }
};

inline ForceDeflectionCurve force_deflection(const RobotDescription& desc, const Configuration& config,
                                             double tension, const Eigen::Vector3d& direction,
                                             const StiffnessOptions& opt = {}) {
    const double firm = directional_stiffness(desc, config, direction, opt);
    const double loose = desc.tendon_stiffness;
    if (!(firm > loose))
        throw DomainError("tendon_stiffness (" + std::to_string(loose) +
                          " N/mm) must be below the firmed stiffness (" + std::to_string(firm) + " N/mm)");
    const double threshold = loosening_threshold(desc, tension);
    return {threshold, firm, loose, threshold / firm};
}

// ---------------------------------------------------------------------------
// Torsion
// ---------------------------------------------------------------------------

/// Twist of a hollow circular shaft, rad. Radii in mm, torque in N·mm.
inline double tube_twist(double length, double outer_radius, double inner_radius, double shear_modulus,
                         double torque) {
    const double polar = 0.5 * std::numbers::pi * (std::pow(outer_radius, 4) - std::pow(inner_radius, 4));
    return torque * length / (polar * shear_modulus);
}

/// Twist of one spine unit under `torque` (N·mm), rad.
inline double spine_twist(const RobotDescription& desc, double torque) {
    return tube_twist(desc.curve_length, desc.spine_outer_diameter / 2.0, desc.spine_inner_diameter / 2.0,
                      desc.shear_modulus(), torque);
}

/// Zig-zag bellows: diameter runs linearly from outer to inner over each half convolution.
struct SkinProfile {
    double length;          ///< l₀, mm
    double outer_diameter;  ///< D, mm
    double inner_diameter;  ///< d, mm
    double thickness;       ///< t, mm
    int convolutions;       ///< N

    static SkinProfile of(const RobotDescription& d) {
        return {d.curve_length, d.skin_outer_diameter, d.skin_inner_diameter, d.skin_thickness, d.skin_convolutions};
    }

    double half_height() const { return length / convolutions / 2.0; }

    double diameter_at(double l) const {
        return outer_diameter + (inner_diameter - outer_diameter) * (l / half_height());
    }

    /// J_b(l) = ½π[(D/2)⁴ − (D/2 − t)⁴].
    double polar_moment_at(double l) const {
        const double r = diameter_at(l) / 2.0;
        return 0.5 * std::numbers::pi * (std::pow(r, 4) - std::pow(r - thickness, 4));
    }
};

namespace detail {

struct SimpsonResult {
    double value;
    double error;
    bool converged;
};

inline SimpsonResult adaptive_simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                                           double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return {left + right + delta / 15.0, std::abs(delta) / 15.0, true};
    if (depth <= 0) return {left + right + delta / 15.0, std::abs(delta) / 15.0, false};
    auto l = adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
    auto r = adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    return {l.value + r.value, l.error + r.error, l.converged && r.converged};
}

}  // namespace detail

/// ∫_a^b f with absolute tolerance `tol`; throws DomainError if it cannot converge.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 48) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const auto r = detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
    if (!r.converged || !std::isfinite(r.value))
        throw DomainError("numerical integration did not converge (achieved error estimate " +
                          std::to_string(r.error) + ", requested " + std::to_string(tol) + ")");
    return r.value;
}

/// Absolute tolerance on the total skin twist, rad.
inline constexpr double kSkinTwistTolerance = 1e-10;

/// Twist of the origami skin over one unit: 2N times the integral over half a convolution.
inline double skin_twist(const SkinProfile& skin, double shear_modulus, double torque) {
    if (skin.convolutions < 1 || skin.length <= 0 || skin.thickness <= 0 ||
        skin.thickness >= std::min(skin.outer_diameter, skin.inner_diameter) / 2.0)
        throw DomainError("invalid skin profile");
    if (torque == 0.0) return 0.0;
    const double per_half = kSkinTwistTolerance / (2.0 * skin.convolutions);
    const double half = adaptive_simpson(
        [&](double l) { return torque / (skin.polar_moment_at(l) * shear_modulus); }, 0.0, skin.half_height(),
        per_half);
    return 2.0 * skin.convolutions * half;
}

inline double skin_twist(const RobotDescription& desc, double torque) {
    return skin_twist(SkinProfile::of(desc), desc.shear_modulus(), torque);
}

}  // namespace plc
