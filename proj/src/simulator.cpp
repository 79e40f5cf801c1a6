#include "twinforge/simulator.hpp"

#include "twinforge/ingestion.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace twinforge::sim {

namespace {

// Distributions built on raw engine output; std::*_distribution is not
// pinned across standard library implementations, the goldens are.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    double gaussian(double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle) * sigma;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

struct Interval {
    double t_in = 0.0;  // ms
    double t_out = 0.0;
};

const RowSpec& row_by_id(const PlantConfig& config, const std::string& id) {
    for (const auto& row : config.rows)
        if (row.id == id) return row;
    throw InvalidConfig("runs.row_id", "unknown row '" + id + "'");
}

}  // namespace

RunAction parse_run_action(const std::string& name) {
    if (name == "push") return RunAction::push;
    if (name == "withdraw") return RunAction::withdraw;
    throw InvalidConfig("runs.action", "unknown action '" + name + "'");
}

std::string to_string(RunAction action) {
    return action == RunAction::push ? "push" : "withdraw";
}

void validate(const PlantConfig& config) {
    std::map<std::string, const RowSpec*> rows;
    for (std::size_t i = 0; i < config.rows.size(); ++i) {
        const auto& row = config.rows[i];
        const std::string path = "rows[" + std::to_string(i) + "]";
        if (row.id.empty()) throw InvalidConfig(path + ".id", "row id must be nonempty");
        if (!rows.emplace(row.id, &row).second)
            throw InvalidConfig(path + ".id", "duplicate row id '" + row.id + "'");
        if (std::abs(row.direction.norm() - 1.0) > 1e-9)
            throw InvalidConfig(path + ".direction", "must be unit length");
        if (row.length <= 0.0) throw InvalidConfig(path + ".length", "must be > 0");
        std::map<std::string, bool> sensor_names;
        for (std::size_t k = 0; k < row.sensors.size(); ++k) {
            const auto& sensor = row.sensors[k];
            const std::string spath = path + ".sensors[" + std::to_string(k) + "]";
            if (sensor.signal_name.empty())
                throw InvalidConfig(spath + ".signal_name", "must be nonempty");
            if (!sensor_names.emplace(sensor.signal_name, true).second)
                throw InvalidConfig(spath + ".signal_name",
                                    "duplicate sensor '" + sensor.signal_name + "'");
            if (sensor.offset < 0.0 || sensor.offset > row.length)
                throw InvalidConfig(spath + ".offset", "must lie in [0, length]");
            if (sensor.trigger_halfwidth <= 0.0)
                throw InvalidConfig(spath + ".trigger_halfwidth", "must be > 0");
        }
    }
    if (config.carrier_speed <= 0.0) throw InvalidConfig("carrier_speed", "must be > 0");
    if (config.speed_jitter < 0.0 || config.speed_jitter >= 1.0)
        throw InvalidConfig("speed_jitter", "must lie in [0, 1)");
    if (config.rtls.moving_interval_ms <= 0) throw InvalidConfig("rtls.moving_interval_ms", "must be > 0");
    if (config.rtls.rest_interval_ms <= 0) throw InvalidConfig("rtls.rest_interval_ms", "must be > 0");
    if (config.rtls.noise_sigma < 0.0) throw InvalidConfig("rtls.noise_sigma", "must be >= 0");
    if (config.rtls.shock_probability < 0.0 || config.rtls.shock_probability > 1.0)
        throw InvalidConfig("rtls.shock_probability", "must lie in [0, 1]");
    for (std::size_t i = 0; i < config.runs.size(); ++i) {
        const auto& run = config.runs[i];
        const std::string path = "runs[" + std::to_string(i) + "]";
        if (run.transponder_id.empty())
            throw InvalidConfig(path + ".transponder_id", "must be nonempty");
        if (rows.count(run.row_id) == 0)
            throw InvalidConfig(path + ".row_id", "unknown row '" + run.row_id + "'");
        if (run.start_ms < 0) throw InvalidConfig(path + ".start_ms", "must be >= 0");
    }
}

SimulationOutput simulate(const PlantConfig& config, std::uint64_t seed) {
    validate(config);
    Rng rng(seed);

    SimulationOutput out;
    for (const auto& row : config.rows)
        for (const auto& sensor : row.sensors)
            out.truth.sensors.push_back(
                {sensor.signal_name, Vec2(row.origin + sensor.offset * row.direction), row.id});

    struct PlannedRun {
        const RunSpec* spec = nullptr;
        const RowSpec* row = nullptr;
        double speed = 0.0;       // m/s, jittered
        double duration_ms = 0.0;
        TimestampMs t_arr = 0;
    };

    // Per-run speeds are drawn in schedule order so the trace is a pure
    // function of (config, seed).
    std::vector<PlannedRun> runs;
    runs.reserve(config.runs.size());
    for (const auto& spec : config.runs) {
        PlannedRun run;
        run.spec = &spec;
        run.row = &row_by_id(config, spec.row_id);
        run.speed =
            config.carrier_speed * rng.uniform(1.0 - config.speed_jitter, 1.0 + config.speed_jitter);
        run.duration_ms = run.row->length / run.speed * 1000.0;
        run.t_arr = spec.start_ms + static_cast<TimestampMs>(run.duration_ms);
        runs.push_back(run);
    }
    std::stable_sort(runs.begin(), runs.end(), [](const PlannedRun& a, const PlannedRun& b) {
        return a.spec->start_ms < b.spec->start_ms;
    });

    std::map<std::string, std::vector<const PlannedRun*>> by_transponder;
    for (const auto& run : runs) by_transponder[run.spec->transponder_id].push_back(&run);
    for (const auto& [tid, list] : by_transponder)
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i]->spec->start_ms < list[i - 1]->t_arr)
                throw InvalidConfig("runs", "transponder '" + tid + "' has overlapping runs");

    // Movement fixes and ground truth; rest heartbeats while a carrier
    // dwells at a row end between a push and the following withdraw.
    for (const auto& [tid, list] : by_transponder) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            const PlannedRun& run = *list[i];
            const RowSpec& row = *run.row;
            const TimestampMs t0 = run.spec->start_ms;

            for (TimestampMs t = t0; static_cast<double>(t - t0) <= run.duration_ms;
                 t += config.rtls.moving_interval_ms) {
                double s = run.speed * static_cast<double>(t - t0) / 1000.0;
                s = std::min(s, row.length);
                double along = run.spec->action == RunAction::push ? s : row.length - s;
                Vec2 p = row.origin + along * row.direction;
                out.positions.push_back(
                    {tid, t,
                     Vec3(quantize(p.x() + rng.gaussian(config.rtls.noise_sigma)),
                          quantize(p.y() + rng.gaussian(config.rtls.noise_sigma)), 0.0)});
            }
            out.truth.stop_events.push_back({tid, run.t_arr});
            out.truth.subsequence_labels.push_back({tid, t0, run.t_arr, row.id});

            // Dwell tail: the carrier stays put only until it is withdrawn
            // again; after leaving a row it is outside the tracked zone.
            bool dwells = i + 1 < list.size() && run.spec->action == RunAction::push &&
                          list[i + 1]->spec->action == RunAction::withdraw &&
                          list[i + 1]->spec->row_id == run.spec->row_id;
            if (!dwells) continue;
            const TimestampMs rest_until = list[i + 1]->spec->start_ms;
            double along = run.spec->action == RunAction::push ? row.length : 0.0;
            Vec2 rest_pos = row.origin + along * row.direction;
            for (TimestampMs t = run.t_arr + config.rtls.rest_interval_ms; t < rest_until;
                 t += config.rtls.rest_interval_ms) {
                out.positions.push_back(
                    {tid, t,
                     Vec3(quantize(rest_pos.x() + rng.gaussian(config.rtls.noise_sigma)),
                          quantize(rest_pos.y() + rng.gaussian(config.rtls.noise_sigma)), 0.0)});
                if (rng.uniform() < config.rtls.shock_probability) {
                    // Shock artifact: the same computed position re-sent a
                    // few times at moving rate.
                    double bx = quantize(rest_pos.x() + rng.gaussian(config.rtls.noise_sigma));
                    double by = quantize(rest_pos.y() + rng.gaussian(config.rtls.noise_sigma));
                    std::size_t repeats = 3 + static_cast<std::size_t>(rng.below(4));
                    TimestampMs tb = t + config.rtls.rest_interval_ms / 2;
                    for (std::size_t k = 0; k < repeats && tb < rest_until;
                         ++k, tb += config.rtls.moving_interval_ms) {
                        out.positions.push_back(
                            {tid, tb,
                             Vec3(quantize(bx + rng.uniform(-0.0005, 0.0005)),
                                  quantize(by + rng.uniform(-0.0005, 0.0005)), 0.0)});
                    }
                }
            }
        }
    }

    // Light-barrier occupancy: per sensor, union of the trigger-zone
    // crossings of every run on its row, then one 0->1/1->0 pair per
    // merged interval.
    std::map<std::string, std::vector<Interval>> occupancy;
    for (const auto& run : runs) {
        for (const auto& sensor : run.row->sensors) {
            double lo = sensor.offset - sensor.trigger_halfwidth;
            double hi = sensor.offset + sensor.trigger_halfwidth;
            // Travelled distance window during which the carrier is in the zone.
            double s_in, s_out;
            if (run.spec->action == RunAction::push) {
                s_in = std::max(0.0, lo);
                s_out = std::min(run.row->length, hi);
            } else {
                s_in = std::max(0.0, run.row->length - hi);
                s_out = std::min(run.row->length, run.row->length - lo);
            }
            if (s_in > s_out) continue;
            double t_in = run.spec->start_ms + s_in / run.speed * 1000.0;
            double t_out = run.spec->start_ms + s_out / run.speed * 1000.0;
            occupancy[sensor.signal_name].push_back({t_in, t_out});
        }
    }

    for (const auto& row : config.rows) {
        for (const auto& sensor : row.sensors) {
            out.signals.push_back({sensor.signal_name, 0, 0.0});
            auto it = occupancy.find(sensor.signal_name);
            if (it == occupancy.end()) continue;
            auto& intervals = it->second;
            std::sort(intervals.begin(), intervals.end(),
                      [](const Interval& a, const Interval& b) { return a.t_in < b.t_in; });
            std::vector<Interval> merged;
            for (const auto& iv : intervals) {
                if (!merged.empty() && iv.t_in <= merged.back().t_out)
                    merged.back().t_out = std::max(merged.back().t_out, iv.t_out);
                else
                    merged.push_back(iv);
            }
            for (const auto& iv : merged) {
                out.signals.push_back({sensor.signal_name, static_cast<TimestampMs>(iv.t_in), 1.0});
                out.signals.push_back({sensor.signal_name, static_cast<TimestampMs>(iv.t_out), 0.0});
            }
        }
    }

    sort_by_time(out.positions);
    sort_by_time(out.signals);
    std::stable_sort(out.truth.stop_events.begin(), out.truth.stop_events.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    std::stable_sort(out.truth.subsequence_labels.begin(), out.truth.subsequence_labels.end(),
                     [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
    return out;
}

PlantConfig default_warehouse_config() {
    PlantConfig config;
    for (int r = 0; r < 4; ++r) {
        RowSpec row;
        row.id = "R" + std::to_string(r + 1);
        row.origin = Vec2(0.0, static_cast<double>(r));
        row.direction = Vec2(1.0, 0.0);
        row.length = 3.0;
        const double offsets[] = {0.5, 1.2, 1.9, 2.6};
        for (int k = 0; k < 4; ++k)
            row.sensors.push_back({row.id + ".lb" + std::to_string(k + 1), offsets[k], 0.02});
        config.rows.push_back(std::move(row));
    }

    // Six carriers rotate over the rows in 60 s slots; in every slot four
    // carriers are active on four distinct rows, two are off-zone. Each
    // visit is one push and one withdraw.
    const TimestampMs slot = 60000;
    for (int s = 0; s < 6; ++s) {
        for (int c = 0; c < 6; ++c) {
            int v = (c + s) % 6;
            if (v >= 4) continue;
            std::string tid = "T0" + std::to_string(c + 1);
            std::string row_id = "R" + std::to_string(v + 1);
            TimestampMs push_start = s * slot + v * 2000;
            config.runs.push_back({tid, row_id, RunAction::push, push_start});
            config.runs.push_back({tid, row_id, RunAction::withdraw, push_start + 37000});
        }
    }
    return config;
}

plc::PlcProject warehouse_plc_project(const PlantConfig& config) {
    plc::PlcProject project;
    project.name = "warehouse";
    project.hardware_modules.push_back({"cpu1", plc::ModuleKind::CPU});
    project.hardware_modules.push_back({"di1", plc::ModuleKind::DI});
    project.hardware_modules.push_back({"di2", plc::ModuleKind::DI});
    project.hardware_modules.push_back({"do1", plc::ModuleKind::DO});

    int input_index = 0;
    int output_index = 0;
    plc::FunctionBlock coordinator;
    coordinator.name = "fb_main";
    plc::DataBlock state;
    state.name = "db_state";

    for (std::size_t r = 0; r < config.rows.size(); ++r) {
        const auto& row = config.rows[r];
        plc::FunctionBlock fb;
        fb.name = "fb_" + row.id;
        for (const auto& sensor : row.sensors) {
            plc::Signal s;
            s.name = sensor.signal_name;
            s.address = "%I" + std::to_string(input_index / 8) + "." + std::to_string(input_index % 8);
            ++input_index;
            s.direction = plc::SignalDirection::in;
            s.datatype = plc::DataType::BOOL;
            s.module = r < config.rows.size() / 2 ? "di1" : "di2";
            project.signals.push_back(std::move(s));
            fb.reads.push_back(sensor.signal_name);
        }
        for (const char* motor : {"m_in", "m_out"}) {
            plc::Signal s;
            s.name = row.id + "." + motor;
            s.address = "%Q" + std::to_string(output_index / 8) + "." + std::to_string(output_index % 8);
            ++output_index;
            s.direction = plc::SignalDirection::out;
            s.datatype = plc::DataType::BOOL;
            s.module = "do1";
            project.signals.push_back(std::move(s));
            fb.writes.push_back(row.id + "." + motor);
        }
        coordinator.calls.push_back(fb.name);
        project.function_blocks.push_back(std::move(fb));
        state.fields.push_back({row.id + "_count", plc::DataType::INT});
    }
    project.function_blocks.push_back(std::move(coordinator));
    project.data_blocks.push_back(std::move(state));
    return project;
}

namespace {

nlohmann::ordered_json vec2_json(const Vec2& v) { return nlohmann::ordered_json::array({v.x(), v.y()}); }

Vec2 vec2_from(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw InvalidConfig(path, "expected [x, y]");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

std::string config_to_json(const PlantConfig& config) {
    nlohmann::ordered_json doc;
    doc["carrier_speed"] = config.carrier_speed;
    doc["speed_jitter"] = config.speed_jitter;
    doc["rtls"]["moving_interval_ms"] = config.rtls.moving_interval_ms;
    doc["rtls"]["rest_interval_ms"] = config.rtls.rest_interval_ms;
    doc["rtls"]["noise_sigma"] = config.rtls.noise_sigma;
    doc["rtls"]["shock_probability"] = config.rtls.shock_probability;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : config.rows) {
        nlohmann::ordered_json r;
        r["id"] = row.id;
        r["origin"] = vec2_json(row.origin);
        r["direction"] = vec2_json(row.direction);
        r["length"] = row.length;
        r["sensors"] = nlohmann::ordered_json::array();
        for (const auto& sensor : row.sensors) {
            nlohmann::ordered_json s;
            s["signal_name"] = sensor.signal_name;
            s["offset"] = sensor.offset;
            s["trigger_halfwidth"] = sensor.trigger_halfwidth;
            r["sensors"].push_back(std::move(s));
        }
        doc["rows"].push_back(std::move(r));
    }
    doc["runs"] = nlohmann::ordered_json::array();
    for (const auto& run : config.runs) {
        nlohmann::ordered_json j;
        j["transponder_id"] = run.transponder_id;
        j["row_id"] = run.row_id;
        j["action"] = to_string(run.action);
        j["start_ms"] = run.start_ms;
        doc["runs"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

PlantConfig config_from_json(const std::string& text) try {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw InvalidConfig("document", "not a JSON object");
    PlantConfig config;
    config.carrier_speed = doc.value("carrier_speed", config.carrier_speed);
    config.speed_jitter = doc.value("speed_jitter", config.speed_jitter);
    if (doc.contains("rtls")) {
        const auto& r = doc["rtls"];
        config.rtls.moving_interval_ms = r.value("moving_interval_ms", config.rtls.moving_interval_ms);
        config.rtls.rest_interval_ms = r.value("rest_interval_ms", config.rtls.rest_interval_ms);
        config.rtls.noise_sigma = r.value("noise_sigma", config.rtls.noise_sigma);
        config.rtls.shock_probability = r.value("shock_probability", config.rtls.shock_probability);
    }
    for (const auto& rj : doc.value("rows", nlohmann::json::array())) {
        RowSpec row;
        row.id = rj.value("id", "");
        row.origin = vec2_from(rj.at("origin"), "rows.origin");
        row.direction = vec2_from(rj.at("direction"), "rows.direction");
        row.length = rj.value("length", 0.0);
        for (const auto& sj : rj.value("sensors", nlohmann::json::array())) {
            SensorSpec sensor;
            sensor.signal_name = sj.value("signal_name", "");
            sensor.offset = sj.value("offset", 0.0);
            sensor.trigger_halfwidth = sj.value("trigger_halfwidth", 0.02);
            row.sensors.push_back(std::move(sensor));
        }
        config.rows.push_back(std::move(row));
    }
    for (const auto& rj : doc.value("runs", nlohmann::json::array())) {
        RunSpec run;
        run.transponder_id = rj.value("transponder_id", "");
        run.row_id = rj.value("row_id", "");
        run.action = parse_run_action(rj.value("action", "push"));
        run.start_ms = rj.value("start_ms", static_cast<TimestampMs>(0));
        config.runs.push_back(std::move(run));
    }
    validate(config);
    return config;
} catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("document", e.what());
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    nlohmann::ordered_json doc;
    doc["sensors"] = nlohmann::ordered_json::array();
    for (const auto& s : truth.sensors) {
        nlohmann::ordered_json j;
        j["signal_name"] = s.signal_name;
        j["x"] = s.position.x();
        j["y"] = s.position.y();
        j["row_id"] = s.row_id;
        doc["sensors"].push_back(std::move(j));
    }
    doc["stop_events"] = nlohmann::ordered_json::array();
    for (const auto& e : truth.stop_events) {
        nlohmann::ordered_json j;
        j["transponder_id"] = e.transponder_id;
        j["t"] = e.t;
        doc["stop_events"].push_back(std::move(j));
    }
    doc["subsequence_labels"] = nlohmann::ordered_json::array();
    for (const auto& l : truth.subsequence_labels) {
        nlohmann::ordered_json j;
        j["transponder_id"] = l.transponder_id;
        j["t_start"] = l.t_start;
        j["t_end"] = l.t_end;
        j["row_id"] = l.row_id;
        doc["subsequence_labels"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) try {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error("not a ground-truth JSON document");
    GroundTruth truth;
    for (const auto& j : doc.value("sensors", nlohmann::json::array()))
        truth.sensors.push_back({j.at("signal_name").get<std::string>(),
                                 Vec2(j.at("x").get<double>(), j.at("y").get<double>()),
                                 j.at("row_id").get<std::string>()});
    for (const auto& j : doc.value("stop_events", nlohmann::json::array()))
        truth.stop_events.push_back(
            {j.at("transponder_id").get<std::string>(), j.at("t").get<TimestampMs>()});
    for (const auto& j : doc.value("subsequence_labels", nlohmann::json::array()))
        truth.subsequence_labels.push_back({j.at("transponder_id").get<std::string>(),
                                            j.at("t_start").get<TimestampMs>(),
                                            j.at("t_end").get<TimestampMs>(),
                                            j.at("row_id").get<std::string>()});
    return truth;
} catch (const nlohmann::json::exception& e) {
    throw Error("malformed ground-truth document: " + std::string(e.what()));
}

}  // namespace twinforge::sim
