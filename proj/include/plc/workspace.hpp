#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "plc/kdtree.hpp"
#include "plc/kinematics.hpp"

namespace plc {

/// Edge length of the position-key quantization cell, mm.
inline constexpr double kPositionKeyCell = 1e-6;

/// Position rounded to the nearest multiple of kPositionKeyCell per axis.
struct PositionKey {
    std::array<std::int64_t, 3> cell{};

    static PositionKey from(const Eigen::Vector3d& p) {
        PositionKey k;
        for (int i = 0; i < 3; ++i) k.cell[static_cast<std::size_t>(i)] = std::llround(p[i] / kPositionKeyCell);
        return k;
    }

    friend bool operator==(const PositionKey&, const PositionKey&) = default;
    friend auto operator<=>(const PositionKey&, const PositionKey&) = default;
};

struct PositionKeyHash {
    std::size_t operator()(const PositionKey& k) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto c : k.cell) {
            h ^= static_cast<std::uint64_t>(c);
            h *= 1099511628211ULL;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Reachable end positions of a discrete chain, a k-d tree over them, and the
/// key → configurations multimap. Points are stored in ascending key order;
/// each bucket lists configurations in canonical enumeration order.
class WorkspaceIndex {
public:
    WorkspaceIndex() = default;

    /// Assembles an index from already-grouped data. `bucket_offsets` has
    /// points.size() + 1 entries delimiting slices of `ordinals`.
    WorkspaceIndex(int segment_count, int tooth_count, std::vector<Eigen::Vector3d> points,
                   std::vector<std::uint64_t> bucket_offsets, std::vector<std::uint64_t> ordinals)
        : segment_count_(segment_count),
          tooth_count_(tooth_count),
          offsets_(std::move(bucket_offsets)),
          ordinals_(std::move(ordinals)) {
        if (offsets_.size() != points.size() + 1 || offsets_.front() != 0 || offsets_.back() != ordinals_.size())
            throw InvariantError("workspace bucket offsets do not partition the configuration list");
        keys_.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (offsets_[i + 1] <= offsets_[i]) throw InvariantError("workspace point with an empty bucket");
            keys_.push_back(PositionKey::from(points[i]));
            if (i > 0 && !(keys_[i - 1] < keys_[i]))
                throw InvariantError("workspace points are not in strictly ascending key order");
            lookup_.emplace(keys_.back(), i);
        }
        tree_ = KdTree(std::move(points));
    }

    int segment_count() const noexcept { return segment_count_; }
    int tooth_count() const noexcept { return tooth_count_; }
    std::size_t point_count() const noexcept { return tree_.size(); }
    std::size_t configuration_count() const noexcept { return ordinals_.size(); }
    bool empty() const noexcept { return tree_.empty(); }

    const std::vector<Eigen::Vector3d>& points() const noexcept { return tree_.points(); }
    const Eigen::Vector3d& point(std::size_t i) const { return tree_.points().at(i); }
    const PositionKey& key(std::size_t i) const { return keys_.at(i); }
    const KdTree& tree() const noexcept { return tree_; }

    std::size_t bucket_size(std::size_t i) const { return static_cast<std::size_t>(offsets_.at(i + 1) - offsets_.at(i)); }

    std::span<const std::uint64_t> bucket_ordinals(std::size_t i) const {
        return std::span<const std::uint64_t>(ordinals_).subspan(static_cast<std::size_t>(offsets_.at(i)),
                                                                 bucket_size(i));
    }

    std::vector<Configuration> bucket(std::size_t i) const {
        std::vector<Configuration> out;
        for (auto o : bucket_ordinals(i)) out.push_back(Configuration::from_ordinal(o, segment_count_, tooth_count_));
        return out;
    }

    /// Point index holding `key`, or -1.
    std::ptrdiff_t find(const PositionKey& key) const {
        auto it = lookup_.find(key);
        return it == lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    }

    const std::vector<std::uint64_t>& bucket_offsets() const noexcept { return offsets_; }
    const std::vector<std::uint64_t>& ordinals() const noexcept { return ordinals_; }

private:
    int segment_count_ = 0;
    int tooth_count_ = 0;
    std::vector<PositionKey> keys_;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<std::uint64_t> ordinals_;
    std::unordered_map<PositionKey, std::size_t, PositionKeyHash> lookup_;
    KdTree tree_;
};

/// Visits all tooth_count^segment_count configurations (joint 1 outermost,
/// index ascending), merges coincident end positions by PositionKey, and
/// builds the tree over the distinct points.
inline WorkspaceIndex enumerate_workspace(const RobotDescription& desc,
                                          double enumeration_budget = kDefaultEnumerationBudget) {
    const double raw = desc.configuration_count();
    if (raw > enumeration_budget) {
        throw DomainError("workspace enumeration of " + std::to_string(raw) +
                          " configurations exceeds the budget of " + std::to_string(enumeration_budget));
    }
    if (desc.segment_count < 1 || desc.tooth_count < 2) throw InvariantError("invalid chain size");
    const int n = desc.segment_count;
    const int teeth = desc.tooth_count;
    const auto total = static_cast<std::uint64_t>(raw);

    std::vector<RigidTransform> unit(static_cast<std::size_t>(teeth));
    for (int k = 0; k < teeth; ++k) unit[static_cast<std::size_t>(k)] = segment_transform(desc, tooth_angle(k, teeth));

    // Depth-first odometer: prefix[j] is the pose after joints 0..j-1.
    std::vector<RigidTransform> prefix(static_cast<std::size_t>(n) + 1);
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) prefix[static_cast<std::size_t>(j) + 1] = prefix[static_cast<std::size_t>(j)] * unit[0];

    std::unordered_map<PositionKey, std::uint32_t, PositionKeyHash> first_seen;
    std::vector<Eigen::Vector3d> positions;
    std::vector<PositionKey> keys;
    std::vector<std::uint32_t> owner(total);

    for (std::uint64_t ord = 0; ord < total; ++ord) {
        if (ord > 0) {
            int j = n - 1;
            while (++digits[static_cast<std::size_t>(j)] == teeth) {
                digits[static_cast<std::size_t>(j)] = 0;
                --j;
            }
            for (int m = j; m < n; ++m)
                prefix[static_cast<std::size_t>(m) + 1] =
                    prefix[static_cast<std::size_t>(m)] * unit[static_cast<std::size_t>(digits[static_cast<std::size_t>(m)])];
        }
        const Eigen::Vector3d& p = prefix[static_cast<std::size_t>(n)].translation;
        const PositionKey key = PositionKey::from(p);
        auto [it, inserted] = first_seen.try_emplace(key, static_cast<std::uint32_t>(positions.size()));
        if (inserted) {
            positions.push_back(p);
            keys.push_back(key);
        }
        owner[ord] = it->second;
    }

    // Canonical point order: ascending key.
    std::vector<std::uint32_t> perm(positions.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    std::vector<std::uint32_t> rank(positions.size());
    for (std::uint32_t r = 0; r < perm.size(); ++r) rank[perm[r]] = r;

    std::vector<Eigen::Vector3d> points(positions.size());
    for (std::uint32_t r = 0; r < perm.size(); ++r) points[r] = positions[perm[r]];

    // Counting sort of ordinals by bucket; stable, so each bucket stays in enumeration order.
    std::vector<std::uint64_t> offsets(points.size() + 1, 0);
    for (auto o : owner) ++offsets[rank[o] + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    std::vector<std::uint64_t> ordinals(total);
    for (std::uint64_t ord = 0; ord < total; ++ord) ordinals[cursor[rank[owner[ord]]]++] = ord;

    return WorkspaceIndex(n, teeth, std::move(points), std::move(offsets), std::move(ordinals));
}

// ---------------------------------------------------------------------------
// Queries and metrics
// ---------------------------------------------------------------------------

struct NearestResult {
    std::size_t point_index;
    Eigen::Vector3d position;
    std::vector<Configuration> configurations;
};

/// Nearest reachable point (ties toward the smaller key) and its bucket.
inline NearestResult knn_query(const WorkspaceIndex& index, const Eigen::Vector3d& target) {
    if (index.empty()) throw DomainError("workspace index is empty");
    const std::size_t i = index.tree().nearest(target);
    return {i, index.point(i), index.bucket(i)};
}

/// Worst-case distance from a query to its nearest reachable point.
inline double reach_accuracy(const WorkspaceIndex& index, std::span<const Eigen::Vector3d> queries) {
    if (index.empty()) throw DomainError("workspace index is empty");
    double worst = 0.0;
    for (const auto& q : queries) {
        const std::size_t i = index.tree().nearest(q);
        worst = std::max(worst, std::sqrt(KdTree::squared_distance(q, index.point(i))));
    }
    return worst;
}

/// Population covariance (1/N normalization).
inline Eigen::Matrix3d covariance(std::span<const Eigen::Vector3d> points) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        const Eigen::Vector3d d = p - mean;
        cov += d * d.transpose();
    }
    return cov / static_cast<double>(points.size());
}

/// Cube root of the product of covariance eigenvalues. Eigenvalues whose
/// magnitude is below 1e-12·λ_max are round-off and count as zero.
inline double omnivariance(std::span<const Eigen::Vector3d> points) {
    if (points.size() < 2) throw DomainError("omnivariance needs at least 2 points");
    const Eigen::Matrix3d cov = covariance(points);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
    Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    const double top = lambda[2];
    if (!(top > 0.0)) throw DomainError("omnivariance of identical points is undefined");
    for (int i = 0; i < 3; ++i) {
        if (std::abs(lambda[i]) <= 1e-12 * top) lambda[i] = 0.0;
        if (lambda[i] < 0.0) throw DomainError("covariance has a significantly negative eigenvalue");
    }
    return std::cbrt(lambda[0] * lambda[1] * lambda[2]);
}

/// Omnivariance of each stored point's k-nearest neighbourhood (the point included).
inline std::vector<double> local_omnivariance(const WorkspaceIndex& index, std::size_t neighbours) {
    if (neighbours < 2) throw DomainError("local omnivariance needs a neighbourhood of at least 2 points");
    std::vector<double> out(index.point_count());
    std::vector<Eigen::Vector3d> hood;
    for (std::size_t i = 0; i < index.point_count(); ++i) {
        hood.clear();
        for (auto j : index.tree().k_nearest(index.point(i), neighbours)) hood.push_back(index.point(j));
        out[i] = hood.size() < 2 ? 0.0 : omnivariance(hood);
    }
    return out;
}

}  // namespace plc
