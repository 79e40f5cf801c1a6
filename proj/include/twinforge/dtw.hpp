#pragma once

#include "twinforge/types.hpp"

#include <optional>
#include <vector>

namespace twinforge {

/// Planar trajectory; storage rows are told apart by absolute location, so
/// coordinates are deliberately not normalized.
using Trajectory = std::vector<Vec2>;

struct DtwParams {
    /// Sakoe-Chiba band half-width |i-j| <= band_width; unset = unconstrained.
    std::optional<int> band_width;
    /// Divide the accumulated cost by len(a)+len(b).
    bool normalize_by_path_length = false;
};

/// Minimal accumulated Euclidean cost over monotone warping paths with
/// steps {(-1,0),(0,-1),(-1,-1)}, endpoints matched. Symmetric in (a,b).
/// Throws EmptyTrajectory, or InfeasibleBand when the band cannot reach
/// the opposite corner.
double dtw_distance(const Trajectory& a, const Trajectory& b, const DtwParams& params = {});

}  // namespace twinforge
