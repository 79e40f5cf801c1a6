#include "twinforge/classifier.hpp"

#include "twinforge/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <map>

namespace twinforge {

ClassifyMode parse_classify_mode(const std::string& name) {
    if (name == "whole") return ClassifyMode::whole;
    if (name == "windowed") return ClassifyMode::windowed;
    throw Error("unknown classifier mode '" + name + "' (expected whole or windowed)");
}

std::string to_string(ClassifyMode mode) {
    return mode == ClassifyMode::whole ? "whole" : "windowed";
}

SmoothResult majority_smooth(const std::vector<std::string>& per_unit_labels) {
    if (per_unit_labels.empty()) throw Error("majority_smooth requires a nonempty label list");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : per_unit_labels) ++counts[l];
    std::size_t best = 0;
    for (const auto& [label, count] : counts) best = std::max(best, count);
    SmoothResult result;
    std::size_t winners = 0;
    for (const auto& [label, count] : counts) {
        if (count != best) continue;
        ++winners;
        if (result.majority.empty()) result.majority = label;  // map order = lexicographic
    }
    result.tie = winners > 1;
    result.labels.assign(per_unit_labels.size(), result.majority);
    return result;
}

Trajectory to_trajectory(const Subsequence& sub) {
    Trajectory t;
    t.reserve(sub.samples.size());
    for (const auto& s : sub.samples) t.emplace_back(s.pos.x(), s.pos.y());
    return t;
}

std::vector<Trajectory> extract_windows(const Trajectory& t, int window_len, int stride) {
    std::vector<Trajectory> windows;
    const std::size_t len = static_cast<std::size_t>(window_len);
    if (t.size() <= len) {
        windows.push_back(t);
        return windows;
    }
    for (std::size_t start = 0; start + len <= t.size(); start += static_cast<std::size_t>(stride))
        windows.emplace_back(t.begin() + start, t.begin() + start + len);
    return windows;
}

NnDtwClassifier NnDtwClassifier::fit(const std::vector<LabeledSequence>& training, DtwParams dtw,
                                     ClassifierMode mode) {
    if (training.empty()) throw EmptyTrainingSet("cannot fit a 1-NN model on zero sequences");
    if (mode.window_len < 2) throw Error("window_len must be >= 2");
    if (mode.stride < 1) throw Error("stride must be >= 1");
    for (const auto& seq : training)
        if (seq.trajectory.size() < 2)
            throw Error("training sequence '" + seq.source_id + "' has fewer than 2 points");

    NnDtwClassifier model;
    model.training_ = training;
    model.dtw_ = dtw;
    model.mode_ = mode;
    if (mode.mode == ClassifyMode::whole) {
        model.units_ = training;
    } else {
        for (const auto& seq : training) {
            for (auto& w : extract_windows(seq.trajectory, mode.window_len, mode.stride))
                model.units_.push_back({seq.label, std::move(w), seq.source_id});
        }
    }
    return model;
}

ClassificationResult NnDtwClassifier::classify(const Trajectory& query) const {
    if (query.size() < 2) throw QueryTooShort("query has fewer than 2 samples");

    auto nearest_label = [this](const Trajectory& unit) {
        double best = std::numeric_limits<double>::infinity();
        const LabeledSequence* winner = nullptr;
        for (const auto& candidate : units_) {
            double cost = dtw_distance(unit, candidate.trajectory, dtw_);
            if (cost < best) {  // ties keep the smallest instance index
                best = cost;
                winner = &candidate;
            }
        }
        return winner->label;
    };

    ClassificationResult result;
    if (mode_.mode == ClassifyMode::whole) {
        result.label = nearest_label(query);
        result.per_unit_labels = {result.label};
        return result;
    }

    if (query.size() < static_cast<std::size_t>(mode_.window_len))
        throw QueryTooShort("windowed mode needs at least " + std::to_string(mode_.window_len) +
                            " samples, got " + std::to_string(query.size()));
    for (std::size_t start = 0; start + static_cast<std::size_t>(mode_.window_len) <= query.size();
         start += static_cast<std::size_t>(mode_.stride)) {
        Trajectory window(query.begin() + start,
                          query.begin() + start + static_cast<std::size_t>(mode_.window_len));
        result.per_unit_labels.push_back(nearest_label(window));
    }
    SmoothResult smoothed = majority_smooth(result.per_unit_labels);
    result.label = smoothed.majority;
    result.tie = smoothed.tie;
    return result;
}

std::string NnDtwClassifier::to_json() const {
    nlohmann::ordered_json doc;
    doc["version"] = 1;
    doc["dtw"]["band_width"] =
        dtw_.band_width ? nlohmann::json(*dtw_.band_width) : nlohmann::json(nullptr);
    doc["dtw"]["normalize_by_path_length"] = dtw_.normalize_by_path_length;
    doc["mode"]["mode"] = to_string(mode_.mode);
    doc["mode"]["window_len"] = mode_.window_len;
    doc["mode"]["stride"] = mode_.stride;
    doc["instances"] = nlohmann::ordered_json::array();
    for (const auto& seq : training_) {
        nlohmann::ordered_json inst;
        inst["label"] = seq.label;
        inst["source"] = seq.source_id;
        auto points = nlohmann::ordered_json::array();
        for (const auto& p : seq.trajectory) points.push_back({p.x(), p.y()});
        inst["trajectory"] = std::move(points);
        doc["instances"].push_back(std::move(inst));
    }
    return doc.dump(2) + "\n";
}

NnDtwClassifier NnDtwClassifier::from_json(const std::string& text) try {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("version", 0) != 1)
        throw Error("not a version-1 classifier model file");
    DtwParams dtw;
    if (doc.contains("dtw")) {
        const auto& d = doc["dtw"];
        if (d.contains("band_width") && !d["band_width"].is_null())
            dtw.band_width = d["band_width"].get<int>();
        dtw.normalize_by_path_length = d.value("normalize_by_path_length", false);
    }
    ClassifierMode mode;
    if (doc.contains("mode")) {
        const auto& m = doc["mode"];
        mode.mode = parse_classify_mode(m.value("mode", "windowed"));
        mode.window_len = m.value("window_len", 10);
        mode.stride = m.value("stride", 1);
    }
    std::vector<LabeledSequence> training;
    for (const auto& inst : doc.at("instances")) {
        LabeledSequence seq;
        seq.label = inst.at("label").get<std::string>();
        seq.source_id = inst.value("source", "");
        for (const auto& p : inst.at("trajectory"))
            seq.trajectory.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        training.push_back(std::move(seq));
    }
    return fit(training, dtw, mode);
} catch (const nlohmann::json::exception& e) {
    throw Error("malformed model file: " + std::string(e.what()));
}

}  // namespace twinforge
