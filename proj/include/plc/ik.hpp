#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>

#include "plc/workspace.hpp"

namespace plc {

/// How candidates in a redundant bucket are compared with the reference.
enum class AngularMetric {
    Circular,   ///< Σ_j min(|Δk_j|, N − |Δk_j|), wrap-aware
    Euclidean,  ///< Σ_j Δk_j², unwrapped indices
};

struct IkOptions {
    AngularMetric metric = AngularMetric::Circular;
    /// When set, ties at the minimal distance are broken uniformly at random
    /// with this seed instead of lexicographically.
    std::optional<std::uint64_t> seed;
};

struct IkSolution {
    Configuration config;
    Eigen::Vector3d achieved_position;
    double position_error;
    std::size_t candidate_count;
};

/// Distance between two configurations in tooth units under `metric`.
inline std::int64_t configuration_distance(const Configuration& a, const Configuration& b, AngularMetric metric) {
    const int teeth = a.tooth_count();
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const std::int64_t d = std::abs(a.index(j) - b.index(j));
        sum += metric == AngularMetric::Circular ? std::min<std::int64_t>(d, teeth - d) : d * d;
    }
    return sum;
}

/// Nearest reachable point to `target`, resolved to the configuration in its
/// bucket closest to `reference`.
inline IkSolution solve_ik(const WorkspaceIndex& index, const RobotDescription& desc, const Eigen::Vector3d& target,
                           const Configuration& reference, const IkOptions& options = {}) {
    if (index.empty()) throw DomainError("cannot solve IK on an empty workspace index");
    require_valid(reference, desc);
    if (index.segment_count() != desc.segment_count || index.tooth_count() != desc.tooth_count)
        throw DomainError("workspace index was built for a different chain");

    const NearestResult nearest = knn_query(index, target);
    const auto& candidates = nearest.configurations;

    std::vector<std::size_t> best;
    std::int64_t best_dist = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto d = configuration_distance(candidates[i], reference, options.metric);
        if (best.empty() || d < best_dist) {
            best_dist = d;
            best.assign(1, i);
        } else if (d == best_dist) {
            best.push_back(i);
        }
    }

    std::size_t pick = best.front();
    if (options.seed) {
        std::mt19937_64 rng(*options.seed);
        pick = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
    } else {
        for (auto i : best)
            if (candidates[i] < candidates[pick]) pick = i;
    }

    IkSolution sol{candidates[pick], Eigen::Vector3d::Zero(), 0.0, candidates.size()};
    sol.achieved_position = end_position(desc, sol.config);
    sol.position_error = (sol.achieved_position - target).norm();
    return sol;
}

}  // namespace plc
