#include "twinforge/pipeline.hpp"

#include "twinforge/artifacts.hpp"
#include "twinforge/knowledge_graph.hpp"
#include "twinforge/plc.hpp"
#include "twinforge/simulator.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twinforge;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("twinforge_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Simulates the default warehouse and lays out logs + PLC export + ground
// truth the way cmd_simulate would.
fs::path prepare_inputs(const std::string& name, std::uint64_t seed) {
    fs::path dir = fresh_dir(name);
    sim::PlantConfig config = sim::default_warehouse_config();
    sim::SimulationOutput out = sim::simulate(config, seed);

    std::ostringstream pos;
    write_position_log(pos, out.positions, LogFormat::csv);
    write_file(dir / "position.csv", pos.str());
    std::ostringstream sig;
    write_signal_log(sig, out.signals, LogFormat::csv);
    write_file(dir / "signals.csv", sig.str());
    write_file(dir / "ground_truth.json", sim::ground_truth_to_json(out.truth));
    write_file(dir / "plc_export.xml",
               plc::serialize_plc_export(sim::warehouse_plc_project(config)));
    return dir;
}

PipelineConfig base_config(const fs::path& inputs, const fs::path& out_dir) {
    PipelineConfig cfg;
    cfg.plc_export = inputs / "plc_export.xml";
    cfg.position_log = inputs / "position.csv";
    cfg.signal_log = inputs / "signals.csv";
    cfg.training_labels = inputs / "ground_truth.json";
    cfg.ground_truth = inputs / "ground_truth.json";
    cfg.output_dir = out_dir;
    return cfg;
}

}  // namespace

TEST_CASE("end-to-end pipeline over the default warehouse scenario") {
    fs::path inputs = prepare_inputs("e2e", 42);
    PipelineConfig cfg = base_config(inputs, fresh_dir("e2e_out"));
    PipelineReport report = run_pipeline(cfg);

    CHECK(report.position_samples > 3000);
    CHECK(report.transponders == 6);
    CHECK(report.subsequences >= 48);
    CHECK(report.estimates == 16);
    CHECK(report.model_fitted);
    REQUIRE(report.accuracy.has_value());
    CHECK(report.accuracy->sensors_evaluated == 16);
    CHECK(report.accuracy->sensor_error_max_m < 0.10);
    CHECK(report.accuracy->stop_recall >= 0.95);
    CHECK(report.accuracy->subsequence_accuracy >= 0.865);
    CHECK(report.accuracy->groups_assigned == 16);
    CHECK(report.accuracy->groups_correct == 16);

    // outputs exist and parse
    for (const auto& name : pipeline_output_names())
        CHECK(fs::exists(cfg.output_dir / name));

    kg::Graph graph = kg::Graph::import_json(read_file(cfg.output_dir / "graph.json"));
    CHECK(graph.integrity_violations().empty());
    CHECK(graph.count_edges_of_type("LOCATED_AT") == 16);
    CHECK(graph.count_edges_of_type("BELONGS_TO") == 16);
    CHECK(graph.count_nodes_with_label("MechatronicGroup") == 4);

    // BELONGS_TO fan-in of one group is exactly that row's sensors
    auto row1 = graph.query_neighbors("grp:R1", "BELONGS_TO", kg::Direction::in);
    REQUIRE(row1.size() == 4);
    for (const auto* node : row1) CHECK(node->id.rfind("sig:R1.lb", 0) == 0);

    std::ifstream subs_in(cfg.output_dir / "subsequences.jsonl");
    auto records = read_subsequence_records(subs_in);
    CHECK(records.size() == report.subsequences);

    std::ifstream sensors_in(cfg.output_dir / "sensors.csv");
    auto sensors = read_sensor_csv(sensors_in);
    CHECK(sensors.size() == 16);
    for (const auto& row : sensors) CHECK_FALSE(row.group.empty());
}

TEST_CASE("report.json carries the versioned schema") {
    fs::path inputs = prepare_inputs("schema", 7);
    PipelineConfig cfg = base_config(inputs, fresh_dir("schema_out"));
    run_pipeline(cfg);

    nlohmann::json report = nlohmann::json::parse(read_file(cfg.output_dir / "report.json"));
    CHECK(report.at("schema_version").get<int>() == 1);
    REQUIRE(report.contains("counts"));
    for (const char* key :
         {"position_samples", "rejected_position_records", "signal_samples",
          "rejected_signal_records", "transponders", "subsequences", "rest_samples",
          "dropped_samples", "unlabeled_subsequences", "tied_subsequences", "observations",
          "dropped_transitions", "estimates", "insufficient_support_signals", "assigned_signals"}) {
        INFO(key);
        CHECK(report["counts"].contains(key));
        CHECK(report["counts"][key].is_number_unsigned());
    }
    CHECK(report.at("classifier").at("mode").is_string());
    CHECK(report.at("runtime_ms").is_number());
    CHECK((report.at("accuracy").is_object() || report.at("accuracy").is_null()));
    CHECK(report["accuracy"]["segmentation"]["stop_recall"].is_number());
}

namespace {

// Structural check mirroring schemas/graph.schema.json (no JSON Schema
// engine is linked; the constraints are enforced by hand).
void check_against_graph_schema(const nlohmann::json& doc) {
    REQUIRE(doc.is_object());
    REQUIRE(doc.size() == 3);
    REQUIRE(doc.contains("metadata"));
    REQUIRE(doc.contains("nodes"));
    REQUIRE(doc.contains("edges"));

    const auto& meta = doc["metadata"];
    CHECK(meta.at("created_at").is_string());
    CHECK(meta.at("source_versions").is_object());
    for (const auto& [k, v] : meta["source_versions"].items()) CHECK(v.is_string());
    CHECK(meta.at("notes").is_array());

    auto check_props = [](const nlohmann::json& props) {
        REQUIRE(props.is_object());
        for (const auto& [k, v] : props.items()) {
            INFO(k);
            CHECK((v.is_string() || v.is_number() || v.is_boolean()));
        }
    };
    for (const auto& n : doc["nodes"]) {
        REQUIRE(n.size() == 3);
        CHECK(n.at("id").is_string());
        CHECK_FALSE(n.at("id").get<std::string>().empty());
        REQUIRE(n.at("labels").is_array());
        CHECK(n.at("labels").size() >= 1);
        for (const auto& l : n["labels"]) CHECK(l.is_string());
        check_props(n.at("props"));
    }
    for (const auto& e : doc["edges"]) {
        REQUIRE(e.size() == 5);
        for (const char* key : {"id", "type", "source", "target"}) {
            CHECK(e.at(key).is_string());
            CHECK_FALSE(e.at(key).get<std::string>().empty());
        }
        check_props(e.at("props"));
    }
}

}  // namespace

TEST_CASE("full pipeline graph validates against the shipped schema") {
    // the schema file itself must be well-formed JSON
    nlohmann::json schema = nlohmann::json::parse(
        read_file(std::string(TWINFORGE_SOURCE_DIR) + "/schemas/graph.schema.json"));
    CHECK(schema.at("required") == nlohmann::json({"metadata", "nodes", "edges"}));

    fs::path inputs = prepare_inputs("schema_graph", 13);
    PipelineConfig cfg = base_config(inputs, fresh_dir("schema_graph_out"));
    run_pipeline(cfg);
    check_against_graph_schema(nlohmann::json::parse(read_file(cfg.output_dir / "graph.json")));
}

TEST_CASE("determinism: re-running on identical inputs reproduces graph.json byte for byte") {
    fs::path inputs = prepare_inputs("determinism", 42);
    PipelineConfig a = base_config(inputs, fresh_dir("det_a"));
    PipelineConfig b = base_config(inputs, fresh_dir("det_b"));
    run_pipeline(a);
    run_pipeline(b);
    CHECK(read_file(a.output_dir / "graph.json") == read_file(b.output_dir / "graph.json"));
    CHECK(read_file(a.output_dir / "graph.graphml") == read_file(b.output_dir / "graph.graphml"));
    CHECK(read_file(a.output_dir / "sensors.csv") == read_file(b.output_dir / "sensors.csv"));
}

TEST_CASE("pipeline errors: missing inputs and invalid model choice") {
    fs::path inputs = prepare_inputs("errors", 3);
    PipelineConfig cfg = base_config(inputs, fresh_dir("errors_out"));
    cfg.signal_log = inputs / "missing.csv";
    CHECK_THROWS_AS(run_pipeline(cfg), Error);

    cfg = base_config(inputs, fresh_dir("errors_out2"));
    cfg.training_labels.clear();  // neither model nor labels
    CHECK_THROWS_AS(run_pipeline(cfg), Error);

    cfg = base_config(inputs, fresh_dir("errors_out3"));
    cfg.model = inputs / "ground_truth.json";  // both set
    CHECK_THROWS_AS(run_pipeline(cfg), Error);
}

TEST_CASE("pipeline config file: relative paths resolve against the config directory") {
    fs::path inputs = prepare_inputs("cfgfile", 5);
    nlohmann::ordered_json doc;
    doc["plc_export"] = "plc_export.xml";
    doc["position_log"] = "position.csv";
    doc["signal_log"] = "signals.csv";
    doc["training_labels"] = "ground_truth.json";
    doc["output_dir"] = "out";
    doc["segmentation"] = {{"gap_factor", 3.0}};
    doc["fusion"] = {{"cluster_radius", 0.3}};
    write_file(inputs / "pipeline.json", doc.dump(2));

    PipelineConfig cfg = pipeline_config_from_file(inputs / "pipeline.json");
    CHECK(cfg.plc_export == inputs / "plc_export.xml");
    CHECK(cfg.output_dir == inputs / "out");
    CHECK(cfg.model.empty());
    CHECK(cfg.segmentation.position_epsilon == doctest::Approx(0.02));  // default preserved
}

TEST_CASE("subsequence records re-extract exactly from the position log") {
    fs::path inputs = prepare_inputs("reextract", 21);
    PipelineConfig cfg = base_config(inputs, fresh_dir("reextract_out"));
    run_pipeline(cfg);

    std::ifstream subs_in(cfg.output_dir / "subsequences.jsonl");
    auto records = read_subsequence_records(subs_in);
    std::ifstream pos_in(inputs / "position.csv");
    auto positions = read_position_log(pos_in, {});
    auto subs = reextract_subsequences(records, positions);
    REQUIRE(subs.size() == records.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CHECK(subs[i].samples.size() == records[i].sample_count);
        CHECK(subs[i].samples.front().t == records[i].t_start);
        CHECK(subs[i].samples.back().t == records[i].t_end);
    }
}

TEST_CASE("whole-sequence classifier mode drives the pipeline too") {
    fs::path inputs = prepare_inputs("whole_mode", 17);
    PipelineConfig cfg = base_config(inputs, fresh_dir("whole_mode_out"));
    cfg.classifier.mode = ClassifyMode::whole;
    PipelineReport report = run_pipeline(cfg);
    REQUIRE(report.accuracy.has_value());
    CHECK(report.estimates == 16);
    CHECK(report.accuracy->subsequence_accuracy >= 0.865);
    CHECK(report.accuracy->groups_correct == 16);
}

TEST_CASE("observation count equals sensor crossings plus concurrency fan-out") {
    // Two rows, one sensor each, two carriers running simultaneously at the
    // same (jitter-free, noise-free) speed: each sensor flips twice, and
    // both concurrent subsequences cover both flips -> 2 sensors x 2
    // transitions x 2 covering subsequences = 8 observations.
    sim::PlantConfig config;
    for (int r = 0; r < 2; ++r) {
        sim::RowSpec row;
        row.id = "R" + std::to_string(r + 1);
        row.origin = Vec2(0.0, static_cast<double>(r));
        row.direction = Vec2(1.0, 0.0);
        row.length = 3.0;
        row.sensors = {{row.id + ".lb1", 1.5, 0.02}};
        config.rows.push_back(std::move(row));
    }
    config.speed_jitter = 0.0;
    config.rtls.noise_sigma = 0.0;
    config.rtls.shock_probability = 0.0;
    config.runs = {{"T01", "R1", sim::RunAction::push, 0}, {"T02", "R2", sim::RunAction::push, 0}};
    auto out = sim::simulate(config, 1);

    std::vector<Subsequence> subs;
    for (const auto& [tid, series] : split_by_transponder(out.positions)) {
        auto seg = segment(series, {});
        for (auto& sub : seg.subsequences) subs.push_back(std::move(sub));
    }
    REQUIRE(subs.size() == 2);
    auto set = collect_observations(out.signals, subs, {}, {});
    CHECK(set.observations.size() == 8);
    CHECK(set.dropped_transitions == 0);
}

TEST_CASE("confusion matrix: diagonal counts for correct labels, csv shape") {
    sim::GroundTruth truth;
    truth.subsequence_labels = {{"T01", 0, 100, "R1"}, {"T01", 200, 300, "R2"},
                                {"T02", 0, 100, "R1"}};
    std::vector<SubsequenceRecord> records(3);
    records[0].id = "T01#0";
    records[0].transponder_id = "T01";
    records[0].t_start = 0;
    records[0].t_end = 100;
    records[0].label = "R1";  // correct
    records[1].id = "T01#1";
    records[1].transponder_id = "T01";
    records[1].t_start = 200;
    records[1].t_end = 300;
    records[1].label = "R1";  // actual R2, predicted R1
    records[2].id = "T02#0";
    records[2].transponder_id = "T02";
    records[2].t_start = 0;
    records[2].t_end = 100;
    records[2].label = "R1";  // correct

    CHECK(confusion_matrix_csv(records, truth) ==
          "actual,R1,R2\n"
          "R1,2,0\n"
          "R2,1,0\n");
}

TEST_CASE("held-out classification: train on one seed, evaluate on another") {
    // training set from seed 1
    sim::PlantConfig config = sim::default_warehouse_config();
    auto train_out = sim::simulate(config, 1);
    auto train_split = split_by_transponder(train_out.positions);
    std::vector<Subsequence> train_subs;
    for (const auto& [tid, series] : train_split) {
        auto seg = segment(series, {});
        for (auto& sub : seg.subsequences) train_subs.push_back(std::move(sub));
    }
    std::vector<SubsequenceRecord> train_records;
    for (const auto& sub : train_subs) train_records.push_back(to_record(sub));
    auto train_labels = label_subsequences(train_records, train_out.truth);
    std::vector<LabeledSequence> training;
    for (const auto& sub : train_subs) {
        auto it = train_labels.find(sub.id);
        if (it == train_labels.end()) continue;
        training.push_back({it->second, to_trajectory(sub), sub.id});
    }
    REQUIRE(training.size() >= 40);
    auto model = NnDtwClassifier::fit(training, {}, {});

    // held-out evaluation on seed 2
    auto eval_out = sim::simulate(config, 2);
    auto eval_split = split_by_transponder(eval_out.positions);
    std::vector<Subsequence> eval_subs;
    for (const auto& [tid, series] : eval_split) {
        auto seg = segment(series, {});
        for (auto& sub : seg.subsequences) eval_subs.push_back(std::move(sub));
    }
    std::vector<Trajectory> queries;
    for (const auto& sub : eval_subs) queries.push_back(to_trajectory(sub));
    auto results = classify_all(model, queries);

    std::vector<SubsequenceRecord> eval_records;
    for (std::size_t i = 0; i < eval_subs.size(); ++i) {
        SubsequenceRecord rec = to_record(eval_subs[i]);
        if (results[i]) {
            rec.label = results[i]->label;
            rec.window_labels = results[i]->per_unit_labels;
        }
        eval_records.push_back(std::move(rec));
    }
    EvalMetrics metrics = evaluate(eval_records, {}, eval_out.truth);
    CHECK(metrics.subsequences_labeled >= 40);
    CHECK(metrics.subsequence_accuracy >= 0.865);
    CHECK(metrics.window_accuracy_post_smoothing >= metrics.window_accuracy_pre_smoothing);
}
