#pragma once

#include "twinforge/artifacts.hpp"
#include "twinforge/simulator.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// Ground-truth label for each subsequence: the simulator run of the same
/// transponder with the largest time overlap. Unmatched ids are absent.
std::map<std::string, std::string> label_subsequences(const std::vector<SubsequenceRecord>& records,
                                                      const sim::GroundTruth& truth);

struct EvalMetrics {
    // Segmentation: a stop event counts as recovered when some subsequence
    // of its transponder ends within one update interval of it.
    std::size_t stops_total = 0;
    std::size_t stops_recovered = 0;
    double stop_recall = 0.0;

    // Classification, against overlap-matched ground-truth rows.
    std::size_t subsequences_matched = 0;
    std::size_t subsequences_labeled = 0;
    std::size_t subsequences_correct = 0;
    double subsequence_accuracy = 0.0;
    std::size_t windows_total = 0;
    double window_accuracy_pre_smoothing = 0.0;
    double window_accuracy_post_smoothing = 0.0;

    // Sensor position recovery (xy error against true sensor positions).
    std::size_t sensors_evaluated = 0;
    std::size_t sensors_missing = 0;
    double sensor_error_max_m = 0.0;
    double sensor_error_mean_m = 0.0;
    std::vector<std::pair<std::string, double>> sensor_errors;
    std::size_t groups_assigned = 0;
    std::size_t groups_correct = 0;
};

EvalMetrics evaluate(const std::vector<SubsequenceRecord>& records,
                     const std::vector<SensorRow>& sensors, const sim::GroundTruth& truth);

std::string eval_metrics_to_json(const EvalMetrics& metrics);

/// Per-class confusion matrix over the overlap-matched subsequences:
/// `actual,<class...>` header, one row per actual class, counts as cells.
std::string confusion_matrix_csv(const std::vector<SubsequenceRecord>& records,
                                 const sim::GroundTruth& truth);

}  // namespace twinforge
