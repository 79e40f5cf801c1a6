#pragma once

// Test-only oracles, deliberately independent of the library's algorithms:
// DTW by exhaustive warping-path enumeration, single-linkage by BFS over the
// radius graph.

#include "twinforge/types.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace oracles {

// Enumerates every monotone warping path with steps {(1,0),(0,1),(1,1)} from
// (0,0) to (n-1,m-1), accumulating Euclidean local costs, and returns the
// minimum. Exponential; keep lengths small.
inline double brute_force_dtw(const std::vector<twinforge::Vec2>& a,
                              const std::vector<twinforge::Vec2>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    double best = std::numeric_limits<double>::infinity();
    struct Frame {
        std::size_t i, j;
        double cost;
    };
    std::vector<Frame> stack;
    stack.push_back({0, 0, (a[0] - b[0]).norm()});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.i == n - 1 && f.j == m - 1) {
            best = std::min(best, f.cost);
            continue;
        }
        if (f.i + 1 < n) stack.push_back({f.i + 1, f.j, f.cost + (a[f.i + 1] - b[f.j]).norm()});
        if (f.j + 1 < m) stack.push_back({f.i, f.j + 1, f.cost + (a[f.i] - b[f.j + 1]).norm()});
        if (f.i + 1 < n && f.j + 1 < m)
            stack.push_back({f.i + 1, f.j + 1, f.cost + (a[f.i + 1] - b[f.j + 1]).norm()});
    }
    return best;
}

// Connected components of the radius graph via BFS; components ordered by
// smallest member index, members ascending.
inline std::vector<std::vector<std::size_t>> brute_force_clusters(
    const std::vector<twinforge::Vec3>& points, double radius) {
    const std::size_t n = points.size();
    std::vector<bool> visited(n, false);
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t start = 0; start < n; ++start) {
        if (visited[start]) continue;
        std::vector<std::size_t> members;
        std::queue<std::size_t> frontier;
        frontier.push(start);
        visited[start] = true;
        while (!frontier.empty()) {
            std::size_t i = frontier.front();
            frontier.pop();
            members.push_back(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (visited[j] || (points[i] - points[j]).norm() > radius) continue;
                visited[j] = true;
                frontier.push(j);
            }
        }
        std::sort(members.begin(), members.end());
        clusters.push_back(std::move(members));
    }
    return clusters;
}

// Small deterministic generator for property tests.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 1) {}
    std::uint64_t next() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return state_;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  private:
    std::uint64_t state_;
};

}  // namespace oracles
