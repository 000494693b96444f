#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace plc {

/// Static 3-d tree over a fixed point set, stored implicitly as a permuted
/// index array (the node of a range is its midpoint).
///
/// Queries break distance ties toward the smaller point index, so a caller
/// that stores points in a canonical order gets a canonical answer.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
        order_.resize(points_.size());
        axis_.assign(points_.size(), 0);
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
        build(0, order_.size());
    }

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const std::vector<Eigen::Vector3d>& points() const noexcept { return points_; }

    static double squared_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        const double dx = a.x() - b.x();
        const double dy = a.y() - b.y();
        const double dz = a.z() - b.z();
        return dx * dx + dy * dy + dz * dz;
    }

    /// Index of the nearest stored point; requires a non-empty tree.
    std::size_t nearest(const Eigen::Vector3d& q) const {
        Candidate best{std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max()};
        nearest_in(q, 0, order_.size(), best);
        return best.index;
    }

    /// Up to k nearest indices ordered by (distance, index).
    std::vector<std::size_t> k_nearest(const Eigen::Vector3d& q, std::size_t k) const {
        std::vector<std::size_t> out;
        if (k == 0 || points_.empty()) return out;
        std::priority_queue<Candidate> heap;  // max-heap: worst candidate on top
        k_nearest_in(q, 0, order_.size(), k, heap);
        out.resize(heap.size());
        for (std::size_t i = heap.size(); i-- > 0;) {
            out[i] = heap.top().index;
            heap.pop();
        }
        return out;
    }

private:
    struct Candidate {
        double d2;
        std::size_t index;
        friend bool operator<(const Candidate& a, const Candidate& b) {
            return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
        }
    };

    void build(std::size_t lo, std::size_t hi) {
        if (hi - lo <= 1) return;
        Eigen::Vector3d mn = points_[order_[lo]], mx = mn;
        for (std::size_t i = lo + 1; i < hi; ++i) {
            mn = mn.cwiseMin(points_[order_[i]]);
            mx = mx.cwiseMax(points_[order_[i]]);
        }
        Eigen::Index axis = 0;
        (mx - mn).maxCoeff(&axis);
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(hi),
                         [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
        axis_[mid] = static_cast<std::uint8_t>(axis);
        build(lo, mid);
        build(mid + 1, hi);
    }

    void nearest_in(const Eigen::Vector3d& q, std::size_t lo, std::size_t hi, Candidate& best) const {
        if (lo >= hi) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t idx = order_[mid];
        const Candidate here{squared_distance(q, points_[idx]), idx};
        if (here < best) best = here;
        if (hi - lo == 1) return;

        const double diff = q[axis_[mid]] - points_[idx][axis_[mid]];
        const bool left_first = diff <= 0.0;
        nearest_in(q, left_first ? lo : mid + 1, left_first ? mid : hi, best);
        // Equality keeps tied points on the far side reachable.
        if (diff * diff <= best.d2) nearest_in(q, left_first ? mid + 1 : lo, left_first ? hi : mid, best);
    }

    void k_nearest_in(const Eigen::Vector3d& q, std::size_t lo, std::size_t hi, std::size_t k,
                      std::priority_queue<Candidate>& heap) const {
        if (lo >= hi) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t idx = order_[mid];
        const Candidate here{squared_distance(q, points_[idx]), idx};
        if (heap.size() < k) {
            heap.push(here);
        } else if (here < heap.top()) {
            heap.pop();
            heap.push(here);
        }
        if (hi - lo == 1) return;

        const double diff = q[axis_[mid]] - points_[idx][axis_[mid]];
        const bool left_first = diff <= 0.0;
        k_nearest_in(q, left_first ? lo : mid + 1, left_first ? mid : hi, k, heap);
        if (heap.size() < k || diff * diff <= heap.top().d2)
            k_nearest_in(q, left_first ? mid + 1 : lo, left_first ? hi : mid, k, heap);
    }

    std::vector<Eigen::Vector3d> points_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint8_t> axis_;
};

}  // namespace plc
