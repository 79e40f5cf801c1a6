#pragma once

#include "twinforge/fusion.hpp"
#include "twinforge/segmentation.hpp"
#include "twinforge/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// One line of subsequences.jsonl: the inspectable summary of a segmented
/// (and possibly classified) subsequence. Samples are not embedded; they
/// re-extract from the position log via transponder id and time span.
struct SubsequenceRecord {
    std::string id;
    std::string transponder_id;
    TimestampMs t_start = 0;
    TimestampMs t_end = 0;
    Vec3 start_pos = Vec3::Zero();
    Vec3 end_pos = Vec3::Zero();
    std::size_t sample_count = 0;
    double update_interval_ms = 0.0;
    std::optional<std::string> label;
    bool label_tied = false;
    std::vector<std::string> window_labels;
};

SubsequenceRecord to_record(const Subsequence& sub);

void write_subsequence_records(std::ostream& out, const std::vector<SubsequenceRecord>& records);
std::vector<SubsequenceRecord> read_subsequence_records(std::istream& in);

/// Rebuilds full subsequences from records plus the originating position
/// log (samples are exactly the transponder's samples inside the span).
std::vector<Subsequence> reextract_subsequences(const std::vector<SubsequenceRecord>& records,
                                                const PositionSeries& positions);

/// sensors.csv row: `signal_name,x_m,y_m,z_m,support,dispersion_m,group`.
struct SensorRow {
    std::string signal_name;
    Vec3 position = Vec3::Zero();
    std::size_t support = 0;
    double dispersion = 0.0;
    std::string group;  // empty = unassigned
};

void write_sensor_csv(std::ostream& out, const std::vector<SensorRow>& rows);
std::vector<SensorRow> read_sensor_csv(std::istream& in);

}  // namespace twinforge
