#pragma once

#include "twinforge/dtw.hpp"
#include "twinforge/segmentation.hpp"
#include "twinforge/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace twinforge {

/// One training example: a movement trajectory tagged with the mechatronic
/// function group (storage row) it ran in.
struct LabeledSequence {
    std::string label;
    Trajectory trajectory;
    std::string source_id;  // originating subsequence
};

enum class ClassifyMode { whole, windowed };

struct ClassifierMode {
    ClassifyMode mode = ClassifyMode::windowed;
    int window_len = 10;
    int stride = 1;
};

ClassifyMode parse_classify_mode(const std::string& name);  // "whole" | "windowed"
std::string to_string(ClassifyMode mode);

struct SmoothResult {
    std::vector<std::string> labels;  // all entries replaced by the majority
    std::string majority;
    bool tie = false;  // broken towards the lexicographically smallest label
};

SmoothResult majority_smooth(const std::vector<std::string>& per_unit_labels);

struct ClassificationResult {
    std::string label;
    std::vector<std::string> per_unit_labels;  // one per query window (windowed mode)
    bool tie = false;
};

/// Instance-based 1-NN with DTW distance. The model owns the training
/// sequences; in windowed mode it additionally derives fixed-length windows
/// with inherited labels. Immutable after fit; classify is reentrant.
class NnDtwClassifier {
  public:
    static NnDtwClassifier fit(const std::vector<LabeledSequence>& training, DtwParams dtw = {},
                               ClassifierMode mode = {});

    ClassificationResult classify(const Trajectory& query) const;

    const std::vector<LabeledSequence>& instances() const { return training_; }
    const ClassifierMode& mode() const { return mode_; }
    const DtwParams& dtw_params() const { return dtw_; }

    // The JSON file is the model (instance-based).
    std::string to_json() const;
    static NnDtwClassifier from_json(const std::string& text);

  private:
    NnDtwClassifier() = default;
    std::vector<LabeledSequence> training_;
    std::vector<LabeledSequence> units_;  // windows in windowed mode, else == training_
    DtwParams dtw_;
    ClassifierMode mode_;
};

/// Drops z; classification runs on the planar trajectory.
Trajectory to_trajectory(const Subsequence& sub);

/// Sliding windows (length window_len, step stride); a shorter sequence
/// yields itself as the single window.
std::vector<Trajectory> extract_windows(const Trajectory& t, int window_len, int stride);

}  // namespace twinforge
