#pragma once

#include "twinforge/errors.hpp"
#include "twinforge/types.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace twinforge {

enum class LogFormat { csv, jsonl };

LogFormat parse_log_format(std::string_view name);  // "csv" | "jsonl"

struct ParseOptions {
    LogFormat format = LogFormat::csv;
    // Strict mode throws MalformedRecord on the first bad line; lenient
    // mode skips and counts. Corrupt plant logs are common, tests need
    // determinism, so strict is the default.
    bool lenient = false;
};

struct ParseStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Position CSV rows: `transponder_id,timestamp_ms,x_m,y_m,z_m`. A leading
/// line equal to that canonical header is skipped. JSONL objects carry keys
/// exactly `id,ts,x,y,z`. Output is sorted by t, stable on ties.
PositionSeries read_position_log(std::istream& in, const ParseOptions& opt = {}, ParseStats* stats = nullptr);

/// Signal CSV rows: `signal_name,timestamp_ms,value`; JSONL keys `name,ts,v`.
SignalSeries read_signal_log(std::istream& in, const ParseOptions& opt = {}, ParseStats* stats = nullptr);

void write_position_log(std::ostream& out, const PositionSeries& series, LogFormat format);
void write_signal_log(std::ostream& out, const SignalSeries& series, LogFormat format);

/// Partition by transponder id; per-key sample order is preserved.
std::map<std::string, PositionSeries> split_by_transponder(const PositionSeries& series);

/// One line of the SLMP-inspired replay grammar (JSONL position record).
PositionSample parse_position_line_jsonl(std::string_view line, std::size_t line_no);

/// Stable sort by timestamp (normalization step shared by the readers).
void sort_by_time(PositionSeries& series);
void sort_by_time(SignalSeries& series);

}  // namespace twinforge
