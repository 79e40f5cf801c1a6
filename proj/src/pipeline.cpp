#include "twinforge/pipeline.hpp"

#include "twinforge/artifacts.hpp"
#include "twinforge/knowledge_graph.hpp"
#include "twinforge/logging.hpp"
#include "twinforge/plc.hpp"
#include "twinforge/simulator.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace twinforge {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("short write to " + path.string());
}

PipelineConfig pipeline_config_from_file(const std::filesystem::path& path) try {
    nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw InvalidConfig(path.string(), "not a JSON object");
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    PipelineConfig cfg;
    auto path_of = [&](const char* key) -> std::filesystem::path {
        if (!doc.contains(key)) return {};
        return resolve(base, doc[key].get<std::string>());
    };
    cfg.plc_export = path_of("plc_export");
    cfg.position_log = path_of("position_log");
    cfg.signal_log = path_of("signal_log");
    cfg.training_labels = path_of("training_labels");
    cfg.model = path_of("model");
    cfg.ground_truth = path_of("ground_truth");
    cfg.output_dir = path_of("output_dir");
    cfg.position_format = parse_log_format(doc.value("position_format", "csv"));
    cfg.signal_format = parse_log_format(doc.value("signal_format", "csv"));
    cfg.lenient = doc.value("lenient", false);

    if (doc.contains("segmentation")) {
        const auto& s = doc["segmentation"];
        if (s.contains("expected_update_interval_ms") && !s["expected_update_interval_ms"].is_null())
            cfg.segmentation.expected_update_interval_ms = s["expected_update_interval_ms"].get<double>();
        cfg.segmentation.gap_factor = s.value("gap_factor", cfg.segmentation.gap_factor);
        cfg.segmentation.position_epsilon = s.value("position_epsilon", cfg.segmentation.position_epsilon);
        cfg.segmentation.rest_repeat_threshold =
            s.value("rest_repeat_threshold", cfg.segmentation.rest_repeat_threshold);
        cfg.segmentation.min_samples = s.value("min_samples", cfg.segmentation.min_samples);
    }
    if (doc.contains("dtw")) {
        const auto& d = doc["dtw"];
        if (d.contains("band_width") && !d["band_width"].is_null())
            cfg.dtw.band_width = d["band_width"].get<int>();
        cfg.dtw.normalize_by_path_length =
            d.value("normalize_by_path_length", cfg.dtw.normalize_by_path_length);
    }
    if (doc.contains("classifier")) {
        const auto& c = doc["classifier"];
        cfg.classifier.mode = parse_classify_mode(c.value("mode", "windowed"));
        cfg.classifier.window_len = c.value("window_len", cfg.classifier.window_len);
        cfg.classifier.stride = c.value("stride", cfg.classifier.stride);
    }
    if (doc.contains("fusion")) {
        const auto& f = doc["fusion"];
        cfg.fusion.window_slack_ms = f.value("window_slack_ms", cfg.fusion.window_slack_ms);
        cfg.fusion.cluster_radius = f.value("cluster_radius", cfg.fusion.cluster_radius);
        cfg.fusion.outlier_k = f.value("outlier_k", cfg.fusion.outlier_k);
        cfg.fusion.min_support = f.value("min_support", cfg.fusion.min_support);
    }
    return cfg;
} catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(path.string(), e.what());
}

std::vector<std::optional<ClassificationResult>> classify_all(const NnDtwClassifier& model,
                                                              const std::vector<Trajectory>& queries) {
    std::vector<std::optional<ClassificationResult>> results(queries.size());
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), queries.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            try {
                results[i] = model.classify(queries[i]);
            } catch (const QueryTooShort&) {
            }
        }
        return results;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w]() {
            for (std::size_t i = w; i < queries.size(); i += workers) {
                try {
                    results[i] = model.classify(queries[i]);
                } catch (const QueryTooShort&) {
                }
            }
        }));
    }
    for (auto& f : futures) f.get();
    return results;
}

const std::vector<std::string>& pipeline_output_names() {
    static const std::vector<std::string> names = {"graph.json", "graph.graphml", "sensors.csv",
                                                   "subsequences.jsonl", "report.json"};
    return names;
}

std::string pipeline_report_to_json(const PipelineReport& r, const PipelineConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    auto& counts = doc["counts"];
    counts["position_samples"] = r.position_samples;
    counts["rejected_position_records"] = r.rejected_position_records;
    counts["signal_samples"] = r.signal_samples;
    counts["rejected_signal_records"] = r.rejected_signal_records;
    counts["transponders"] = r.transponders;
    counts["subsequences"] = r.subsequences;
    counts["rest_samples"] = r.rest_samples;
    counts["dropped_samples"] = r.dropped_samples;
    counts["unlabeled_subsequences"] = r.unlabeled_subsequences;
    counts["tied_subsequences"] = r.tied_subsequences;
    counts["observations"] = r.observations;
    counts["dropped_transitions"] = r.dropped_transitions;
    counts["estimates"] = r.estimates;
    counts["insufficient_support_signals"] = r.insufficient_support_signals;
    counts["assigned_signals"] = r.assigned_signals;
    doc["classifier"]["mode"] = to_string(cfg.classifier.mode);
    doc["classifier"]["window_len"] = cfg.classifier.window_len;
    doc["classifier"]["stride"] = cfg.classifier.stride;
    doc["classifier"]["instances"] = r.model_instances;
    doc["classifier"]["fitted"] = r.model_fitted;
    doc["runtime_ms"] = r.runtime_ms;
    doc["accuracy"] =
        r.accuracy ? nlohmann::ordered_json::parse(eval_metrics_to_json(*r.accuracy))
                   : nlohmann::ordered_json(nullptr);
    return doc.dump(2) + "\n";
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
    const auto t_begin = std::chrono::steady_clock::now();
    PipelineReport report;

    if (cfg.output_dir.empty()) throw Error("pipeline config: output_dir is required");
    std::filesystem::create_directories(cfg.output_dir);

    // Ingest.
    ParseOptions pos_opt{cfg.position_format, cfg.lenient};
    ParseStats pos_stats;
    std::ifstream pos_in(cfg.position_log, std::ios::binary);
    if (!pos_in) throw Error("cannot open position log " + cfg.position_log.string());
    PositionSeries positions = read_position_log(pos_in, pos_opt, &pos_stats);
    report.position_samples = pos_stats.accepted;
    report.rejected_position_records = pos_stats.rejected;

    ParseOptions sig_opt{cfg.signal_format, cfg.lenient};
    ParseStats sig_stats;
    std::ifstream sig_in(cfg.signal_log, std::ios::binary);
    if (!sig_in) throw Error("cannot open signal log " + cfg.signal_log.string());
    SignalSeries signals = read_signal_log(sig_in, sig_opt, &sig_stats);
    report.signal_samples = sig_stats.accepted;
    report.rejected_signal_records = sig_stats.rejected;

    // Segment per transponder.
    auto by_transponder = split_by_transponder(positions);
    report.transponders = by_transponder.size();
    std::vector<Subsequence> subsequences;
    for (const auto& [tid, series] : by_transponder) {
        SegmentationResult seg = segment(series, cfg.segmentation);
        report.rest_samples += seg.rest_samples;
        report.dropped_samples += seg.dropped_samples;
        for (auto& sub : seg.subsequences) subsequences.push_back(std::move(sub));
    }
    report.subsequences = subsequences.size();

    std::vector<SubsequenceRecord> records;
    records.reserve(subsequences.size());
    for (const auto& sub : subsequences) records.push_back(to_record(sub));

    // Model: load, or fit on own subsequences labeled from the training file.
    std::optional<NnDtwClassifier> model;
    if (!cfg.model.empty() && !cfg.training_labels.empty())
        throw Error("pipeline config: give either model or training_labels, not both");
    if (!cfg.model.empty()) {
        model = NnDtwClassifier::from_json(read_file(cfg.model));
    } else if (!cfg.training_labels.empty()) {
        sim::GroundTruth labels = sim::ground_truth_from_json(read_file(cfg.training_labels));
        auto by_id = label_subsequences(records, labels);
        std::vector<LabeledSequence> training;
        for (const auto& sub : subsequences) {
            auto it = by_id.find(sub.id);
            if (it == by_id.end()) continue;
            Trajectory traj = to_trajectory(sub);
            if (traj.size() < 2) continue;
            training.push_back({it->second, std::move(traj), sub.id});
        }
        model = NnDtwClassifier::fit(training, cfg.dtw, cfg.classifier);
        report.model_fitted = true;
    } else {
        throw Error("pipeline config: either model or training_labels is required");
    }
    report.model_instances = model->instances().size();

    // Classify.
    std::vector<Trajectory> queries;
    queries.reserve(subsequences.size());
    for (const auto& sub : subsequences) queries.push_back(to_trajectory(sub));
    auto classifications = classify_all(*model, queries);

    std::map<std::string, std::string> labels_by_id;
    for (std::size_t i = 0; i < subsequences.size(); ++i) {
        if (!classifications[i]) {
            ++report.unlabeled_subsequences;
            continue;
        }
        const auto& c = *classifications[i];
        labels_by_id[subsequences[i].id] = c.label;
        records[i].label = c.label;
        records[i].label_tied = c.tie;
        records[i].window_labels = c.per_unit_labels;
        if (c.tie) ++report.tied_subsequences;
    }

    // Fuse.
    ObservationSet observations =
        collect_observations(signals, subsequences, labels_by_id, cfg.fusion);
    report.observations = observations.observations.size();
    report.dropped_transitions = observations.dropped_transitions;

    std::map<std::string, std::vector<TransitionObservation>> by_signal;
    for (const auto& obs : observations.observations)
        by_signal[obs.transition.signal_name].push_back(obs);

    // Group votes run over the observations the position clustering kept:
    // coincidental concurrent movements land in losing clusters and must
    // not outvote the responsible carrier.
    std::vector<SensorEstimate> estimates;
    std::vector<TransitionObservation> attributed;
    for (const auto& [signal, obs] : by_signal) {
        try {
            std::vector<std::size_t> kept;
            estimates.push_back(estimate_sensor_position(signal, obs, cfg.fusion, &kept));
            for (std::size_t i : kept) attributed.push_back(obs[i]);
        } catch (const InsufficientSupport& e) {
            ++report.insufficient_support_signals;
            attributed.insert(attributed.end(), obs.begin(), obs.end());
            log(LogLevel::info, e.what());
        }
    }
    report.estimates = estimates.size();

    auto assignments = assign_signals_to_groups(attributed);
    report.assigned_signals = assignments.size();

    // Software model and graph integration.
    plc::PlcProject project = plc::parse_plc_export(read_file(cfg.plc_export));
    kg::Graph graph;
    graph.metadata().source_versions["twinforge"] = kToolVersion;
    graph.merge_fragment(plc::build_software_graph(project));
    kg::attach_estimates(graph, estimates, assignments);

    // Outputs.
    write_file(cfg.output_dir / "graph.json", graph.export_json());
    write_file(cfg.output_dir / "graph.graphml", graph.export_graphml());
    {
        std::vector<SensorRow> rows;
        rows.reserve(estimates.size());
        for (const auto& est : estimates) {
            SensorRow row;
            row.signal_name = est.signal_name;
            row.position = est.position;
            row.support = est.support;
            row.dispersion = est.dispersion;
            auto it = assignments.find(est.signal_name);
            if (it != assignments.end()) row.group = it->second.group;
            rows.push_back(std::move(row));
        }
        std::ostringstream out;
        write_sensor_csv(out, rows);
        write_file(cfg.output_dir / "sensors.csv", out.str());

        std::ostringstream subs_out;
        write_subsequence_records(subs_out, records);
        write_file(cfg.output_dir / "subsequences.jsonl", subs_out.str());

        if (!cfg.ground_truth.empty()) {
            sim::GroundTruth truth = sim::ground_truth_from_json(read_file(cfg.ground_truth));
            report.accuracy = evaluate(records, rows, truth);
        }
    }
    report.runtime_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t_begin)
                            .count();
    write_file(cfg.output_dir / "report.json", pipeline_report_to_json(report, cfg));
    return report;
}

}  // namespace twinforge
