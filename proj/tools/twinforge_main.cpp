#include "twinforge/artifacts.hpp"
#include "twinforge/classifier.hpp"
#include "twinforge/errors.hpp"
#include "twinforge/evaluation.hpp"
#include "twinforge/ingestion.hpp"
#include "twinforge/logging.hpp"
#include "twinforge/pipeline.hpp"
#include "twinforge/simulator.hpp"
#include "twinforge/stream_listener.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace twinforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

PositionSeries load_positions(const fs::path& path, LogFormat format, bool lenient,
                              ParseStats* stats = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open position log " + path.string());
    return read_position_log(in, ParseOptions{format, lenient}, stats);
}

SignalSeries load_signals(const fs::path& path, LogFormat format, bool lenient) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open signal log " + path.string());
    return read_signal_log(in, ParseOptions{format, lenient});
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const fs::path& out_dir) {
    sim::PlantConfig config = config_path.empty()
                                  ? sim::default_warehouse_config()
                                  : sim::config_from_json(read_file(config_path));
    sim::SimulationOutput out = sim::simulate(config, seed);
    fs::create_directories(out_dir);

    std::ostringstream pos;
    write_position_log(pos, out.positions, LogFormat::csv);
    write_file(out_dir / "position.csv", pos.str());

    std::ostringstream sig;
    write_signal_log(sig, out.signals, LogFormat::csv);
    write_file(out_dir / "signals.csv", sig.str());

    write_file(out_dir / "ground_truth.json", sim::ground_truth_to_json(out.truth));
    write_file(out_dir / "plc_export.xml",
               plc::serialize_plc_export(sim::warehouse_plc_project(config)));

    std::cout << "simulated " << out.positions.size() << " position samples, " << out.signals.size()
              << " signal samples, " << out.truth.sensors.size() << " sensors -> " << out_dir.string()
              << "\n";
    return kExitOk;
}

int cmd_run(PipelineConfig cfg) {
    try {
        PipelineReport report = run_pipeline(cfg);
        std::cout << "pipeline done: " << report.subsequences << " subsequences, "
                  << report.estimates << " sensor estimates, " << report.assigned_signals
                  << " group assignments (" << report.runtime_ms << " ms) -> "
                  << cfg.output_dir.string() << "\n";
        return kExitOk;
    } catch (...) {
        // No partial results: drop whatever this run already wrote.
        for (const auto& name : pipeline_output_names()) {
            std::error_code ec;
            fs::remove(cfg.output_dir / name, ec);
        }
        throw;
    }
}

int cmd_eval(const fs::path& outputs_dir, const std::string& truth_path) {
    std::ifstream subs_in(outputs_dir / "subsequences.jsonl", std::ios::binary);
    if (!subs_in) throw Error("cannot open " + (outputs_dir / "subsequences.jsonl").string());
    auto records = read_subsequence_records(subs_in);

    std::ifstream sensors_in(outputs_dir / "sensors.csv", std::ios::binary);
    if (!sensors_in) throw Error("cannot open " + (outputs_dir / "sensors.csv").string());
    auto sensors = read_sensor_csv(sensors_in);

    sim::GroundTruth truth = sim::ground_truth_from_json(read_file(truth_path));
    EvalMetrics metrics = evaluate(records, sensors, truth);

    write_file(outputs_dir / "eval_report.json", eval_metrics_to_json(metrics));
    write_file(outputs_dir / "confusion.csv", confusion_matrix_csv(records, truth));
    std::cout << "segmentation stop recall: " << metrics.stops_recovered << "/" << metrics.stops_total
              << " = " << metrics.stop_recall << "\n"
              << "subsequence accuracy: " << metrics.subsequences_correct << "/"
              << metrics.subsequences_labeled << " = " << metrics.subsequence_accuracy << "\n"
              << "window accuracy pre/post smoothing: " << metrics.window_accuracy_pre_smoothing
              << " / " << metrics.window_accuracy_post_smoothing << "\n"
              << "sensor position error mean/max (m): " << metrics.sensor_error_mean_m << " / "
              << metrics.sensor_error_max_m << " over " << metrics.sensors_evaluated << " sensors ("
              << metrics.sensors_missing << " missing)\n"
              << "group assignments correct: " << metrics.groups_correct << "/"
              << metrics.groups_assigned << "\n";
    return kExitOk;
}

int cmd_segment(const fs::path& positions_path, LogFormat format, bool lenient,
                const SegmentationParams& params, const fs::path& out_path) {
    PositionSeries positions = load_positions(positions_path, format, lenient);
    std::vector<SubsequenceRecord> records;
    for (const auto& [tid, series] : split_by_transponder(positions)) {
        SegmentationResult seg = segment(series, params);
        for (const auto& sub : seg.subsequences) records.push_back(to_record(sub));
    }
    std::ostringstream out;
    write_subsequence_records(out, records);
    write_file(out_path, out.str());
    std::cout << "segmented " << records.size() << " subsequences -> " << out_path.string() << "\n";
    return kExitOk;
}

struct ClassifyArgs {
    fs::path subsequences;
    fs::path positions;
    std::string format = "csv";
    bool lenient = false;
    fs::path model;        // load
    fs::path fit_labels;   // fit from ground-truth-format labels
    fs::path model_out;    // where to persist a fitted model
    std::string mode = "windowed";
    int window_len = 10;
    int stride = 1;
    int band = 0;  // 0 = none
    fs::path out;
};

int cmd_classify(const ClassifyArgs& args) {
    std::ifstream subs_in(args.subsequences, std::ios::binary);
    if (!subs_in) throw Error("cannot open " + args.subsequences.string());
    auto records = read_subsequence_records(subs_in);
    PositionSeries positions =
        load_positions(args.positions, parse_log_format(args.format), args.lenient);
    auto subs = reextract_subsequences(records, positions);

    DtwParams dtw;
    if (args.band > 0) dtw.band_width = args.band;
    ClassifierMode mode{parse_classify_mode(args.mode), args.window_len, args.stride};

    NnDtwClassifier model = [&]() {
        if (!args.model.empty()) return NnDtwClassifier::from_json(read_file(args.model));
        if (args.fit_labels.empty())
            throw Error("classify needs --model or --fit-labels");
        sim::GroundTruth labels = sim::ground_truth_from_json(read_file(args.fit_labels));
        auto by_id = label_subsequences(records, labels);
        std::vector<LabeledSequence> training;
        for (const auto& sub : subs) {
            auto it = by_id.find(sub.id);
            if (it == by_id.end()) continue;
            training.push_back({it->second, to_trajectory(sub), sub.id});
        }
        return NnDtwClassifier::fit(training, dtw, mode);
    }();
    if (!args.model_out.empty()) write_file(args.model_out, model.to_json());

    std::vector<Trajectory> queries;
    queries.reserve(subs.size());
    for (const auto& sub : subs) queries.push_back(to_trajectory(sub));
    auto results = classify_all(model, queries);
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!results[i]) continue;
        records[i].label = results[i]->label;
        records[i].label_tied = results[i]->tie;
        records[i].window_labels = results[i]->per_unit_labels;
        ++labeled;
    }
    if (!args.out.empty()) {
        std::ostringstream out;
        write_subsequence_records(out, records);
        write_file(args.out, out.str());
    }
    std::cout << "classified " << labeled << "/" << records.size() << " subsequences\n";
    return kExitOk;
}

int cmd_fuse(const fs::path& subsequences_path, const fs::path& positions_path,
             const fs::path& signals_path, const std::string& format, bool lenient,
             const FusionParams& params, const fs::path& out_path) {
    std::ifstream subs_in(subsequences_path, std::ios::binary);
    if (!subs_in) throw Error("cannot open " + subsequences_path.string());
    auto records = read_subsequence_records(subs_in);
    PositionSeries positions = load_positions(positions_path, parse_log_format(format), lenient);
    SignalSeries signals = load_signals(signals_path, parse_log_format(format), lenient);
    auto subs = reextract_subsequences(records, positions);

    std::map<std::string, std::string> labels;
    for (const auto& rec : records)
        if (rec.label) labels[rec.id] = *rec.label;

    ObservationSet observations = collect_observations(signals, subs, labels, params);

    std::map<std::string, std::vector<TransitionObservation>> by_signal;
    for (const auto& obs : observations.observations)
        by_signal[obs.transition.signal_name].push_back(obs);

    // Same composition as the pipeline: group votes use the observations
    // the winning cluster kept.
    std::vector<SensorRow> rows;
    std::vector<TransitionObservation> attributed;
    std::size_t skipped = 0;
    for (const auto& [signal, obs] : by_signal) {
        try {
            std::vector<std::size_t> kept;
            SensorEstimate est = estimate_sensor_position(signal, obs, params, &kept);
            for (std::size_t i : kept) attributed.push_back(obs[i]);
            SensorRow row;
            row.signal_name = est.signal_name;
            row.position = est.position;
            row.support = est.support;
            row.dispersion = est.dispersion;
            rows.push_back(std::move(row));
        } catch (const InsufficientSupport&) {
            attributed.insert(attributed.end(), obs.begin(), obs.end());
            ++skipped;
        }
    }
    auto assignments = assign_signals_to_groups(attributed);
    for (auto& row : rows) {
        auto it = assignments.find(row.signal_name);
        if (it != assignments.end()) row.group = it->second.group;
    }
    std::ostringstream out;
    write_sensor_csv(out, rows);
    write_file(out_path, out.str());
    std::cout << "estimated " << rows.size() << " sensor positions (" << skipped
              << " below min support, " << observations.dropped_transitions
              << " transitions outside any window) -> " << out_path.string() << "\n";
    return kExitOk;
}

int cmd_listen(const std::string& host, std::uint16_t port, const fs::path& out_path) {
    LocationStreamListener listener(host, port);
    std::cout << "listening on " << host << ":" << listener.port() << "\n";
    PositionSeries sink;
    ListenSummary summary = listener.serve_once(sink);
    sort_by_time(sink);
    std::ostringstream out;
    write_position_log(out, sink, LogFormat::csv);
    write_file(out_path, out.str());
    std::cout << "accepted " << summary.accepted << ", rejected " << summary.rejected << " -> "
              << out_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twinforge: reconstructs connected digital models of a brownfield plant from "
                 "PLC exports, signal traces and RTLS position traces"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate synthetic plant data + ground truth");
    std::string sim_config;
    std::uint64_t seed = 42;
    std::string sim_out = "out";
    simulate->add_option("--config", sim_config, "plant config JSON (omit for the default warehouse)");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--out", sim_out, "output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "run the full pipeline from a config file");
    std::string run_config, run_out, run_mode, run_truth;
    bool run_strict = false, run_lenient = false;
    run->add_option("--config", run_config, "pipeline config JSON")->required();
    run->add_option("--out", run_out, "override output directory");
    run->add_option("--mode", run_mode, "override classifier mode (whole|windowed)");
    run->add_option("--ground-truth", run_truth, "override ground truth path");
    run->add_flag("--strict", run_strict, "strict parsing (default)");
    run->add_flag("--lenient", run_lenient, "skip-and-count malformed records");

    // eval
    auto* eval = app.add_subcommand("eval", "score pipeline outputs against ground truth");
    std::string eval_out, eval_truth;
    eval->add_option("--out", eval_out, "pipeline outputs directory")->required();
    eval->add_option("--ground-truth", eval_truth, "ground truth JSON")->required();

    // segment
    auto* seg = app.add_subcommand("segment", "split position logs into movement subsequences");
    std::string seg_positions, seg_format = "csv", seg_out = "subsequences.jsonl";
    bool seg_lenient = false;
    SegmentationParams seg_params;
    double seg_interval = 0.0;
    seg->add_option("--positions", seg_positions, "position log")->required();
    seg->add_option("--format", seg_format, "csv|jsonl");
    seg->add_flag("--lenient", seg_lenient, "skip-and-count malformed records");
    seg->add_option("--interval", seg_interval, "expected update interval ms (0 = auto)");
    seg->add_option("--gap-factor", seg_params.gap_factor, "criterion (1) gap factor");
    seg->add_option("--epsilon", seg_params.position_epsilon, "criterion (2) same-position radius, m");
    seg->add_option("--rest-threshold", seg_params.rest_repeat_threshold, "min same-position run");
    seg->add_option("--min-samples", seg_params.min_samples, "min samples per subsequence");
    seg->add_option("--out", seg_out, "output JSONL");

    // classify
    auto* cls = app.add_subcommand("classify", "label subsequences with their storage row");
    ClassifyArgs cls_args;
    cls->add_option("--subsequences", cls_args.subsequences, "subsequences JSONL")->required();
    cls->add_option("--positions", cls_args.positions, "originating position log")->required();
    cls->add_option("--format", cls_args.format, "csv|jsonl");
    cls->add_flag("--lenient", cls_args.lenient, "skip-and-count malformed records");
    cls->add_option("--model", cls_args.model, "load a persisted model");
    cls->add_option("--fit-labels", cls_args.fit_labels, "fit from ground-truth-format labels");
    cls->add_option("--model-out", cls_args.model_out, "persist the fitted model");
    cls->add_option("--mode", cls_args.mode, "whole|windowed");
    cls->add_option("--window", cls_args.window_len, "window length, samples");
    cls->add_option("--stride", cls_args.stride, "window stride, samples");
    cls->add_option("--band", cls_args.band, "Sakoe-Chiba half-width (0 = none)");
    cls->add_option("--out", cls_args.out, "output JSONL with labels");

    // fuse
    auto* fuse = app.add_subcommand("fuse", "estimate sensor switching positions");
    std::string fuse_subs, fuse_positions, fuse_signals, fuse_format = "csv",
                fuse_out = "sensors.csv";
    bool fuse_lenient = false;
    FusionParams fuse_params;
    fuse->add_option("--subsequences", fuse_subs, "classified subsequences JSONL")->required();
    fuse->add_option("--positions", fuse_positions, "position log")->required();
    fuse->add_option("--signals", fuse_signals, "signal log")->required();
    fuse->add_option("--format", fuse_format, "csv|jsonl");
    fuse->add_flag("--lenient", fuse_lenient, "skip-and-count malformed records");
    fuse->add_option("--slack", fuse_params.window_slack_ms, "transition pairing slack, ms");
    fuse->add_option("--radius", fuse_params.cluster_radius, "single-linkage radius, m");
    fuse->add_option("--outlier-k", fuse_params.outlier_k, "outlier cut, multiples of sigma");
    fuse->add_option("--min-support", fuse_params.min_support, "min winning-cluster size");
    fuse->add_option("--out", fuse_out, "output CSV");

    // listen
    auto* listen = app.add_subcommand("listen", "record one SLMP-inspired TCP replay session");
    std::string listen_host = "127.0.0.1", listen_out = "position.csv";
    std::uint16_t listen_port = 0;
    listen->add_option("--host", listen_host, "bind address");
    listen->add_option("--port", listen_port, "bind port (0 = ephemeral)");
    listen->add_option("--out", listen_out, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_config, seed, sim_out);
        if (run->parsed()) {
            PipelineConfig cfg = pipeline_config_from_file(run_config);
            if (!run_out.empty()) cfg.output_dir = run_out;
            if (!run_mode.empty()) cfg.classifier.mode = parse_classify_mode(run_mode);
            if (!run_truth.empty()) cfg.ground_truth = run_truth;
            if (run_lenient) cfg.lenient = true;
            if (run_strict) cfg.lenient = false;
            return cmd_run(std::move(cfg));
        }
        if (eval->parsed()) return cmd_eval(eval_out, eval_truth);
        if (seg->parsed()) {
            if (seg_interval > 0.0) seg_params.expected_update_interval_ms = seg_interval;
            return cmd_segment(seg_positions, parse_log_format(seg_format), seg_lenient, seg_params,
                               seg_out);
        }
        if (cls->parsed()) return cmd_classify(cls_args);
        if (fuse->parsed())
            return cmd_fuse(fuse_subs, fuse_positions, fuse_signals, fuse_format, fuse_lenient,
                            fuse_params, fuse_out);
        if (listen->parsed()) return cmd_listen(listen_host, listen_port, listen_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
