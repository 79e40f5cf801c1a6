#pragma once

#include "twinforge/segmentation.hpp"
#include "twinforge/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct SignalTransition {
    std::string signal_name;
    TimestampMs t = 0;  // timestamp of the sample carrying the new value
    double from_value = 0.0;
    double to_value = 0.0;
};

struct TransitionObservation {
    SignalTransition transition;
    Vec3 position = Vec3::Zero();  // carrier position interpolated at transition.t
    std::string subsequence_id;
    std::optional<std::string> group;  // subsequence label, when classified
};

/// Estimated switching position of one sensor signal. This is the material
/// position at which the signal flips; the installation position can deviate.
struct SensorEstimate {
    std::string signal_name;
    Vec3 position = Vec3::Zero();
    std::size_t support = 0;    // positions in the winning cluster after outlier removal
    double dispersion = 0.0;    // RMS distance from the centroid, meters
    std::size_t discarded = 0;  // other clusters plus removed outliers
    bool outlier_removal_skipped = false;  // removal would have emptied the cluster
};

struct FusionParams {
    TimestampMs window_slack_ms = 0;
    double cluster_radius = 0.3;
    double outlier_k = 2.0;
    std::size_t min_support = 3;
};

/// All (signal, t) where consecutive samples of one signal differ in value
/// and t lies in [t_start - slack, t_end + slack], ordered by t.
std::vector<SignalTransition> find_transitions(const SignalSeries& signals, const Subsequence& sub,
                                               TimestampMs slack = 0);

/// Linear interpolation between the bracketing samples; throws OutOfSpan.
Vec3 position_at(const Subsequence& sub, TimestampMs t);

struct ObservationSet {
    std::vector<TransitionObservation> observations;
    /// Transitions not covered by any subsequence window (untracked causes).
    std::size_t dropped_transitions = 0;
};

/// Joins every in-window transition with the carrier position at that time.
/// A transition inside several concurrent subsequence windows fans out to
/// one observation per subsequence; clustering resolves the ambiguity later.
ObservationSet collect_observations(const SignalSeries& signals,
                                    const std::vector<Subsequence>& subsequences,
                                    const std::map<std::string, std::string>& labels_by_subsequence,
                                    const FusionParams& params = {});

/// Connected components of the points under link distance <= radius
/// (single linkage with a fixed radius). Component order follows the
/// smallest contained point index; points keep input order inside one.
std::vector<std::vector<std::size_t>> single_linkage_clusters(const std::vector<Vec3>& points,
                                                              double radius);

/// Cluster, pick the winner, strip outliers once, average:
/// largest cluster (ties: smallest RMS dispersion, then smallest centroid
/// lexicographically), drop points whose centroid distance deviates from
/// the mean distance by more than outlier_k × stddev, recompute the
/// centroid once. Throws InsufficientSupport below min_support. When
/// kept_indices is given it receives the indices of the surviving
/// observations — the ones attributable to the responsible carrier, which
/// downstream group assignment votes over.
SensorEstimate estimate_sensor_position(const std::string& signal_name,
                                        const std::vector<TransitionObservation>& observations,
                                        const FusionParams& params = {},
                                        std::vector<std::size_t>* kept_indices = nullptr);

struct GroupAssignment {
    std::string group;
    bool tie = false;
};

/// Majority group label over each signal's labeled observations; signals
/// without labeled observations stay unassigned (absent from the map).
std::map<std::string, GroupAssignment> assign_signals_to_groups(
    const std::vector<TransitionObservation>& observations);

}  // namespace twinforge
