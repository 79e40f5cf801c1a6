#pragma once

#include "twinforge/errors.hpp"
#include "twinforge/plc.hpp"
#include "twinforge/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace twinforge::sim {

struct SensorSpec {
    std::string signal_name;
    double offset = 0.0;  // meters along the row
    double trigger_halfwidth = 0.02;
};

struct RowSpec {
    std::string id;
    Vec2 origin = Vec2::Zero();
    Vec2 direction = Vec2::UnitX();  // unit vector
    double length = 0.0;
    std::vector<SensorSpec> sensors;
};

struct RtlsSpec {
    TimestampMs moving_interval_ms = 200;
    TimestampMs rest_interval_ms = 5000;
    double noise_sigma = 0.03;
    // Chance per elapsed rest interval of a shock artifact: a short burst of
    // near-identical position updates at moving rate.
    double shock_probability = 0.01;
};

enum class RunAction { push, withdraw };

RunAction parse_run_action(const std::string& name);
std::string to_string(RunAction action);

/// One scheduled carrier movement: push travels 0 -> length along the row,
/// withdraw travels length -> 0.
struct RunSpec {
    std::string transponder_id;
    std::string row_id;
    RunAction action = RunAction::push;
    TimestampMs start_ms = 0;
};

struct PlantConfig {
    std::vector<RowSpec> rows;
    double carrier_speed = 0.2;  // m/s
    double speed_jitter = 0.05;  // per-run fraction, uniform in [1-j, 1+j]
    RtlsSpec rtls;
    std::vector<RunSpec> runs;
};

struct GroundTruth {
    struct Sensor {
        std::string signal_name;
        Vec2 position = Vec2::Zero();
        std::string row_id;
    };
    struct StopEvent {
        std::string transponder_id;
        TimestampMs t = 0;
    };
    struct SubsequenceLabel {
        std::string transponder_id;
        TimestampMs t_start = 0;
        TimestampMs t_end = 0;
        std::string row_id;
    };
    std::vector<Sensor> sensors;
    std::vector<StopEvent> stop_events;
    std::vector<SubsequenceLabel> subsequence_labels;
};

struct SimulationOutput {
    PositionSeries positions;
    SignalSeries signals;
    GroundTruth truth;
};

/// Throws InvalidConfig with the path of the offending field.
void validate(const PlantConfig& config);

/// Deterministic for a fixed (config, seed). Movement fixes lie on the
/// moving-interval grid with isotropic Gaussian xy-noise; rest emits
/// heartbeats at the reduced rate plus occasional shock bursts; light
/// barriers emit 0->1 on zone entry and 1->0 on exit. Coordinates are
/// quantized to 0.1 mm so logs round-trip bit-exactly through CSV.
SimulationOutput simulate(const PlantConfig& config, std::uint64_t seed);

/// 4 parallel rows, 3 m long, 1 m apart, 4 light barriers per row, and a
/// 6-carrier schedule that pushes and withdraws on every row with rows
/// running concurrently.
PlantConfig default_warehouse_config();

/// The control-software counterpart of a plant config: light-barrier input
/// signals, two motor outputs per row, one function block per row plus a
/// coordinator, and the hardware modules they map to.
plc::PlcProject warehouse_plc_project(const PlantConfig& config);

PlantConfig config_from_json(const std::string& text);
std::string config_to_json(const PlantConfig& config);

GroundTruth ground_truth_from_json(const std::string& text);
std::string ground_truth_to_json(const GroundTruth& truth);

}  // namespace twinforge::sim
