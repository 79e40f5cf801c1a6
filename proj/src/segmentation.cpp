#include "twinforge/segmentation.hpp"

#include "twinforge/errors.hpp"

#include <algorithm>
#include <vector>

namespace twinforge {

namespace {

// Greedy maximal runs where every pair of samples lies within epsilon.
std::vector<bool> mark_rest_runs(const PositionSeries& chunk, double epsilon, int threshold) {
    const std::size_t n = chunk.size();
    std::vector<bool> rest(n, false);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n) {
            bool close_to_all = true;
            for (std::size_t k = i; k <= j; ++k) {
                if ((chunk[j + 1].pos - chunk[k].pos).norm() > epsilon) {
                    close_to_all = false;
                    break;
                }
            }
            if (!close_to_all) break;
            ++j;
        }
        if (j - i + 1 >= static_cast<std::size_t>(threshold)) {
            for (std::size_t k = i; k <= j; ++k) rest[k] = true;
            i = j + 1;
        } else {
            ++i;
        }
    }
    return rest;
}

}  // namespace

double estimate_update_interval(const PositionSeries& series) {
    if (series.size() < 2)
        throw InsufficientData("update interval needs at least 2 samples, got " +
                               std::to_string(series.size()));
    std::vector<double> gaps;
    gaps.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i)
        gaps.push_back(static_cast<double>(series[i].t - series[i - 1].t));
    std::sort(gaps.begin(), gaps.end());
    std::size_t mid = gaps.size() / 2;
    if (gaps.size() % 2 == 1) return gaps[mid];
    return 0.5 * (gaps[mid - 1] + gaps[mid]);
}

SegmentationResult segment(const PositionSeries& series, const SegmentationParams& params) {
    SegmentationResult result;
    if (series.empty()) return result;

    double interval = params.expected_update_interval_ms
                          ? *params.expected_update_interval_ms
                          : (series.size() >= 2 ? estimate_update_interval(series) : 0.0);
    const double gap_limit = params.gap_factor * interval;

    // Criterion (1): chunks of continuous transmission.
    std::vector<PositionSeries> chunks;
    PositionSeries current;
    for (const auto& s : series) {
        if (!current.empty() && static_cast<double>(s.t - current.back().t) > gap_limit) {
            chunks.push_back(std::move(current));
            current = {};
        }
        current.push_back(s);
    }
    if (!current.empty()) chunks.push_back(std::move(current));

    // Criterion (2): cut rest runs out of each chunk.
    std::size_t index = 0;
    auto emit = [&](PositionSeries&& samples) {
        if (samples.size() < static_cast<std::size_t>(params.min_samples)) {
            result.dropped_samples += samples.size();
            return;
        }
        Subsequence sub;
        sub.transponder_id = samples.front().transponder_id;
        sub.id = sub.transponder_id + "#" + std::to_string(index++);
        sub.t_start = samples.front().t;
        sub.t_end = samples.back().t;
        sub.start_pos = samples.front().pos;
        sub.end_pos = samples.back().pos;
        sub.update_interval_ms = interval;
        sub.samples = std::move(samples);
        result.subsequences.push_back(std::move(sub));
    };

    for (auto& chunk : chunks) {
        std::vector<bool> rest =
            mark_rest_runs(chunk, params.position_epsilon, params.rest_repeat_threshold);
        PositionSeries stretch;
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            if (rest[i]) {
                ++result.rest_samples;
                if (!stretch.empty()) emit(std::move(stretch));
                stretch = {};
            } else {
                stretch.push_back(chunk[i]);
            }
        }
        if (!stretch.empty()) emit(std::move(stretch));
    }
    return result;
}

}  // namespace twinforge
