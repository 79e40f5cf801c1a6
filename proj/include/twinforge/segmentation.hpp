#pragma once

#include "twinforge/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct SegmentationParams {
    /// Moving-rate update interval; unset means estimate from the data
    /// (median of successive time differences).
    std::optional<double> expected_update_interval_ms;
    /// Criterion (1): split where the time gap exceeds gap_factor × interval.
    double gap_factor = 3.0;
    /// Criterion (2): samples within this radius of each other count as the
    /// same position. Kept below one motion step at nominal carrier speed so
    /// RTLS noise on moving fixes cannot fake a rest; repeated shock-artifact
    /// positions land well inside it.
    double position_epsilon = 0.02;
    /// Minimum length of a same-position run to qualify as a rest period.
    int rest_repeat_threshold = 3;
    /// Movement subsequences shorter than this are dropped.
    int min_samples = 5;
};

/// A maximal stretch of continuous carrier movement between two stops.
struct Subsequence {
    std::string id;  // "<transponder>#<index>"
    std::string transponder_id;
    PositionSeries samples;
    TimestampMs t_start = 0;
    TimestampMs t_end = 0;
    Vec3 start_pos = Vec3::Zero();
    Vec3 end_pos = Vec3::Zero();
    double update_interval_ms = 0.0;  // interval the segmentation used
};

struct SegmentationResult {
    std::vector<Subsequence> subsequences;
    std::size_t rest_samples = 0;     // excluded by criterion (2)
    std::size_t dropped_samples = 0;  // in movement stretches below min_samples
};

/// Median of successive time differences; throws InsufficientData below
/// two samples. Even counts take the mean of the two middle values.
double estimate_update_interval(const PositionSeries& series);

/// Two-stage separation of one transponder's time-sorted series:
/// (1) split at gaps > gap_factor × interval, (2) exclude maximal runs of
/// rest_repeat_threshold-or-more samples that all lie within
/// position_epsilon of each other, then drop stretches below min_samples.
SegmentationResult segment(const PositionSeries& series, const SegmentationParams& params = {});

}  // namespace twinforge
