#include "twinforge/dtw.hpp"

#include "twinforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace twinforge {

double dtw_distance(const Trajectory& a, const Trajectory& b, const DtwParams& params) {
    if (a.empty() || b.empty()) throw EmptyTrajectory("dtw_distance requires nonempty trajectories");
    const std::size_t n = a.size();
    const std::size_t m = b.size();

    std::size_t band = std::max(n, m);  // effectively unbounded
    if (params.band_width) {
        if (*params.band_width < 1) throw InfeasibleBand("band_width must be >= 1");
        band = static_cast<std::size_t>(*params.band_width);
        std::size_t diff = n > m ? n - m : m - n;
        if (diff > band)
            throw InfeasibleBand("band half-width " + std::to_string(band) +
                                 " cannot align lengths " + std::to_string(n) + " and " +
                                 std::to_string(m));
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Two-row dynamic program over the local-cost matrix.
    std::vector<double> prev(m, inf), curr(m, inf);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(curr.begin(), curr.end(), inf);
        const std::size_t j_lo = i > band ? i - band : 0;
        const std::size_t j_hi = std::min(m - 1, i + band);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            double local = (a[i] - b[j]).norm();
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = inf;
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, curr[j - 1]);
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
            }
            curr[j] = local + best;
        }
        std::swap(prev, curr);
    }
    double cost = prev[m - 1];
    if (params.normalize_by_path_length) cost /= static_cast<double>(n + m);
    return cost;
}

}  // namespace twinforge
