#include "twinforge/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace twinforge {

namespace {

TimestampMs overlap(TimestampMs a0, TimestampMs a1, TimestampMs b0, TimestampMs b1) {
    return std::min(a1, b1) - std::max(a0, b0);
}

}  // namespace

std::map<std::string, std::string> label_subsequences(const std::vector<SubsequenceRecord>& records,
                                                      const sim::GroundTruth& truth) {
    std::map<std::string, std::string> labels;
    for (const auto& rec : records) {
        TimestampMs best = 0;
        const sim::GroundTruth::SubsequenceLabel* winner = nullptr;
        for (const auto& gt : truth.subsequence_labels) {
            if (gt.transponder_id != rec.transponder_id) continue;
            TimestampMs o = overlap(rec.t_start, rec.t_end, gt.t_start, gt.t_end);
            if (o > best) {
                best = o;
                winner = &gt;
            }
        }
        if (winner != nullptr) labels.emplace(rec.id, winner->row_id);
    }
    return labels;
}

EvalMetrics evaluate(const std::vector<SubsequenceRecord>& records,
                     const std::vector<SensorRow>& sensors, const sim::GroundTruth& truth) {
    EvalMetrics m;

    // Segmentation boundary recall.
    m.stops_total = truth.stop_events.size();
    for (const auto& stop : truth.stop_events) {
        bool recovered = std::any_of(records.begin(), records.end(), [&](const SubsequenceRecord& rec) {
            return rec.transponder_id == stop.transponder_id &&
                   std::abs(static_cast<double>(rec.t_end - stop.t)) <= rec.update_interval_ms;
        });
        if (recovered) ++m.stops_recovered;
    }
    m.stop_recall = m.stops_total == 0
                        ? 1.0
                        : static_cast<double>(m.stops_recovered) / static_cast<double>(m.stops_total);

    // Classification accuracy against overlap-matched truth.
    auto truth_labels = label_subsequences(records, truth);
    std::size_t windows_correct_pre = 0;
    std::size_t windows_correct_post = 0;
    for (const auto& rec : records) {
        auto truth_it = truth_labels.find(rec.id);
        if (truth_it == truth_labels.end()) continue;
        ++m.subsequences_matched;
        if (!rec.label) continue;
        ++m.subsequences_labeled;
        const std::string& expected = truth_it->second;
        if (*rec.label == expected) ++m.subsequences_correct;
        m.windows_total += rec.window_labels.size();
        for (const auto& w : rec.window_labels)
            if (w == expected) ++windows_correct_pre;
        if (*rec.label == expected) windows_correct_post += rec.window_labels.size();
    }
    if (m.subsequences_labeled > 0)
        m.subsequence_accuracy =
            static_cast<double>(m.subsequences_correct) / static_cast<double>(m.subsequences_labeled);
    if (m.windows_total > 0) {
        m.window_accuracy_pre_smoothing =
            static_cast<double>(windows_correct_pre) / static_cast<double>(m.windows_total);
        m.window_accuracy_post_smoothing =
            static_cast<double>(windows_correct_post) / static_cast<double>(m.windows_total);
    }

    // Sensor position errors (planar, against true switching-line centers).
    double error_sum = 0.0;
    for (const auto& gt : truth.sensors) {
        auto it = std::find_if(sensors.begin(), sensors.end(),
                               [&](const SensorRow& r) { return r.signal_name == gt.signal_name; });
        if (it == sensors.end()) {
            ++m.sensors_missing;
            continue;
        }
        double err = (Vec2(it->position.x(), it->position.y()) - gt.position).norm();
        m.sensor_errors.emplace_back(gt.signal_name, err);
        error_sum += err;
        m.sensor_error_max_m = std::max(m.sensor_error_max_m, err);
        ++m.sensors_evaluated;
        if (!it->group.empty()) {
            ++m.groups_assigned;
            if (it->group == gt.row_id) ++m.groups_correct;
        }
    }
    if (m.sensors_evaluated > 0) m.sensor_error_mean_m = error_sum / static_cast<double>(m.sensors_evaluated);
    return m;
}

std::string confusion_matrix_csv(const std::vector<SubsequenceRecord>& records,
                                 const sim::GroundTruth& truth) {
    auto truth_labels = label_subsequences(records, truth);
    std::set<std::string> classes;
    for (const auto& gt : truth.subsequence_labels) classes.insert(gt.row_id);
    for (const auto& rec : records)
        if (rec.label) classes.insert(*rec.label);

    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& rec : records) {
        auto it = truth_labels.find(rec.id);
        if (it == truth_labels.end() || !rec.label) continue;
        ++counts[it->second][*rec.label];
    }

    std::string out = "actual";
    for (const auto& c : classes) out += "," + c;
    out += "\n";
    for (const auto& actual : classes) {
        out += actual;
        for (const auto& predicted : classes) {
            auto row = counts.find(actual);
            std::size_t n = 0;
            if (row != counts.end()) {
                auto cell = row->second.find(predicted);
                if (cell != row->second.end()) n = cell->second;
            }
            out += "," + std::to_string(n);
        }
        out += "\n";
    }
    return out;
}

std::string eval_metrics_to_json(const EvalMetrics& m) {
    nlohmann::ordered_json doc;
    doc["segmentation"]["stops_total"] = m.stops_total;
    doc["segmentation"]["stops_recovered"] = m.stops_recovered;
    doc["segmentation"]["stop_recall"] = m.stop_recall;
    doc["classification"]["subsequences_matched"] = m.subsequences_matched;
    doc["classification"]["subsequences_labeled"] = m.subsequences_labeled;
    doc["classification"]["subsequences_correct"] = m.subsequences_correct;
    doc["classification"]["subsequence_accuracy"] = m.subsequence_accuracy;
    doc["classification"]["windows_total"] = m.windows_total;
    doc["classification"]["window_accuracy_pre_smoothing"] = m.window_accuracy_pre_smoothing;
    doc["classification"]["window_accuracy_post_smoothing"] = m.window_accuracy_post_smoothing;
    doc["sensors"]["evaluated"] = m.sensors_evaluated;
    doc["sensors"]["missing"] = m.sensors_missing;
    doc["sensors"]["position_error_max_m"] = m.sensor_error_max_m;
    doc["sensors"]["position_error_mean_m"] = m.sensor_error_mean_m;
    doc["sensors"]["groups_assigned"] = m.groups_assigned;
    doc["sensors"]["groups_correct"] = m.groups_correct;
    auto errors = nlohmann::ordered_json::object();
    for (const auto& [name, err] : m.sensor_errors) errors[name] = err;
    doc["sensors"]["errors"] = std::move(errors);
    return doc.dump(2) + "\n";
}

}  // namespace twinforge
