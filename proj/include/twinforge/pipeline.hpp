#pragma once

#include "twinforge/classifier.hpp"
#include "twinforge/evaluation.hpp"
#include "twinforge/fusion.hpp"
#include "twinforge/ingestion.hpp"
#include "twinforge/segmentation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct PipelineConfig {
    std::filesystem::path plc_export;
    std::filesystem::path position_log;
    LogFormat position_format = LogFormat::csv;
    std::filesystem::path signal_log;
    LogFormat signal_format = LogFormat::csv;
    /// Exactly one of the two: fit on overlap-labeled own subsequences, or
    /// load a persisted instance model.
    std::filesystem::path training_labels;  // ground-truth format JSON
    std::filesystem::path model;
    std::filesystem::path ground_truth;  // optional, adds accuracy metrics
    std::filesystem::path output_dir;
    bool lenient = false;
    SegmentationParams segmentation;
    DtwParams dtw;
    ClassifierMode classifier;
    FusionParams fusion;
};

/// Relative paths in the file resolve against the config file's directory.
PipelineConfig pipeline_config_from_file(const std::filesystem::path& path);

struct PipelineReport {
    // counters
    std::size_t position_samples = 0;
    std::size_t rejected_position_records = 0;
    std::size_t signal_samples = 0;
    std::size_t rejected_signal_records = 0;
    std::size_t transponders = 0;
    std::size_t subsequences = 0;
    std::size_t rest_samples = 0;
    std::size_t dropped_samples = 0;
    std::size_t unlabeled_subsequences = 0;
    std::size_t tied_subsequences = 0;
    std::size_t observations = 0;
    std::size_t dropped_transitions = 0;
    std::size_t estimates = 0;
    std::size_t insufficient_support_signals = 0;
    std::size_t assigned_signals = 0;
    std::size_t model_instances = 0;
    bool model_fitted = false;
    double runtime_ms = 0.0;
    std::optional<EvalMetrics> accuracy;
};

std::string pipeline_report_to_json(const PipelineReport& report, const PipelineConfig& config);

/// Output file names produced in output_dir by run_pipeline.
const std::vector<std::string>& pipeline_output_names();

/// ingest -> split -> segment -> classify -> fuse -> PLC import -> graph
/// build -> export. Writes graph.json, graph.graphml, sensors.csv,
/// subsequences.jsonl and report.json into output_dir, byte-deterministic
/// for identical inputs.
PipelineReport run_pipeline(const PipelineConfig& config);

/// Classifies many queries concurrently; entries too short for the model
/// come back empty. Result order matches the input order.
std::vector<std::optional<ClassificationResult>> classify_all(const NnDtwClassifier& model,
                                                              const std::vector<Trajectory>& queries);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace twinforge
