#include "twinforge/ingestion.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

namespace twinforge {

namespace {

constexpr std::string_view kPositionHeader = "transponder_id,timestamp_ms,x_m,y_m,z_m";
constexpr std::string_view kSignalHeader = "signal_name,timestamp_ms,value";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

TimestampMs parse_timestamp(std::string_view field, std::size_t line_no) {
    TimestampMs value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw MalformedRecord(line_no, "timestamp is not an integer: '" + std::string(field) + "'");
    return value;
}

double parse_finite(std::string_view field, std::size_t line_no, const char* what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw MalformedRecord(line_no, std::string(what) + " is not a decimal: '" + std::string(field) + "'");
    if (!std::isfinite(value))
        throw MalformedRecord(line_no, std::string(what) + " is not finite");
    return value;
}

PositionSample parse_position_csv(std::string_view line, std::size_t line_no) {
    auto fields = split_fields(line);
    if (fields.size() != 5)
        throw MalformedRecord(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    PositionSample s;
    s.transponder_id = std::string(fields[0]);
    if (s.transponder_id.empty()) throw MalformedRecord(line_no, "empty transponder_id");
    s.t = parse_timestamp(fields[1], line_no);
    s.pos.x() = parse_finite(fields[2], line_no, "x");
    s.pos.y() = parse_finite(fields[3], line_no, "y");
    s.pos.z() = parse_finite(fields[4], line_no, "z");
    return s;
}

SignalSample parse_signal_csv(std::string_view line, std::size_t line_no) {
    auto fields = split_fields(line);
    if (fields.size() != 3)
        throw MalformedRecord(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    SignalSample s;
    s.signal_name = std::string(fields[0]);
    if (s.signal_name.empty()) throw MalformedRecord(line_no, "empty signal_name");
    s.t = parse_timestamp(fields[1], line_no);
    s.value = parse_finite(fields[2], line_no, "value");
    return s;
}

nlohmann::json parse_json_object(std::string_view line, std::size_t line_no,
                                 std::initializer_list<const char*> keys) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "not valid JSON");
    if (!j.is_object()) throw MalformedRecord(line_no, "not a JSON object");
    if (j.size() != keys.size()) throw MalformedRecord(line_no, "unexpected key set");
    for (const char* key : keys)
        if (!j.contains(key)) throw MalformedRecord(line_no, std::string("missing key '") + key + "'");
    return j;
}

double json_finite(const nlohmann::json& v, std::size_t line_no, const char* what) {
    if (!v.is_number()) throw MalformedRecord(line_no, std::string(what) + " is not a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw MalformedRecord(line_no, std::string(what) + " is not finite");
    return d;
}

SignalSample parse_signal_jsonl(std::string_view line, std::size_t line_no) {
    auto j = parse_json_object(line, line_no, {"name", "ts", "v"});
    SignalSample s;
    if (!j["name"].is_string() || j["name"].get<std::string>().empty())
        throw MalformedRecord(line_no, "name must be a nonempty string");
    s.signal_name = j["name"].get<std::string>();
    if (!j["ts"].is_number_integer()) throw MalformedRecord(line_no, "ts must be an integer");
    s.t = j["ts"].get<TimestampMs>();
    s.value = json_finite(j["v"], line_no, "v");
    return s;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

template <typename Sample, typename ParseLine>
std::vector<Sample> read_log(std::istream& in, const ParseOptions& opt, ParseStats* stats,
                             std::string_view csv_header, ParseLine&& parse_line) {
    std::vector<Sample> series;
    ParseStats local;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line_no == 1 && opt.format == LogFormat::csv && line == csv_header) continue;
        try {
            series.push_back(parse_line(line, line_no));
            ++local.accepted;
        } catch (const MalformedRecord&) {
            if (!opt.lenient) throw;
            ++local.rejected;
        }
    }
    sort_by_time(series);
    if (stats != nullptr) *stats = local;
    return series;
}

void require_plain_field(const std::string& value, const char* what) {
    if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos)
        throw Error(std::string(what) + " contains a delimiter, not representable in CSV: '" + value + "'");
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

LogFormat parse_log_format(std::string_view name) {
    if (name == "csv") return LogFormat::csv;
    if (name == "jsonl") return LogFormat::jsonl;
    throw Error("unknown log format '" + std::string(name) + "' (expected csv or jsonl)");
}

PositionSample parse_position_line_jsonl(std::string_view line, std::size_t line_no) {
    auto j = parse_json_object(line, line_no, {"id", "ts", "x", "y", "z"});
    PositionSample s;
    if (!j["id"].is_string() || j["id"].get<std::string>().empty())
        throw MalformedRecord(line_no, "id must be a nonempty string");
    s.transponder_id = j["id"].get<std::string>();
    if (!j["ts"].is_number_integer()) throw MalformedRecord(line_no, "ts must be an integer");
    s.t = j["ts"].get<TimestampMs>();
    s.pos.x() = json_finite(j["x"], line_no, "x");
    s.pos.y() = json_finite(j["y"], line_no, "y");
    s.pos.z() = json_finite(j["z"], line_no, "z");
    return s;
}

PositionSeries read_position_log(std::istream& in, const ParseOptions& opt, ParseStats* stats) {
    auto parse = [&opt](std::string_view line, std::size_t line_no) {
        return opt.format == LogFormat::csv ? parse_position_csv(line, line_no)
                                            : parse_position_line_jsonl(line, line_no);
    };
    return read_log<PositionSample>(in, opt, stats, kPositionHeader, parse);
}

SignalSeries read_signal_log(std::istream& in, const ParseOptions& opt, ParseStats* stats) {
    auto parse = [&opt](std::string_view line, std::size_t line_no) {
        return opt.format == LogFormat::csv ? parse_signal_csv(line, line_no)
                                            : parse_signal_jsonl(line, line_no);
    };
    return read_log<SignalSample>(in, opt, stats, kSignalHeader, parse);
}

void write_position_log(std::ostream& out, const PositionSeries& series, LogFormat format) {
    for (const auto& s : series) {
        if (format == LogFormat::csv) {
            require_plain_field(s.transponder_id, "transponder_id");
            std::string line = s.transponder_id;
            line += ',';
            line += std::to_string(s.t);
            for (int i = 0; i < 3; ++i) {
                line += ',';
                append_double(line, s.pos[i]);
            }
            out << line << '\n';
        } else {
            nlohmann::ordered_json j;
            j["id"] = s.transponder_id;
            j["ts"] = s.t;
            j["x"] = s.pos.x();
            j["y"] = s.pos.y();
            j["z"] = s.pos.z();
            out << j.dump() << '\n';
        }
    }
}

void write_signal_log(std::ostream& out, const SignalSeries& series, LogFormat format) {
    for (const auto& s : series) {
        if (format == LogFormat::csv) {
            require_plain_field(s.signal_name, "signal_name");
            std::string line = s.signal_name;
            line += ',';
            line += std::to_string(s.t);
            line += ',';
            append_double(line, s.value);
            out << line << '\n';
        } else {
            nlohmann::ordered_json j;
            j["name"] = s.signal_name;
            j["ts"] = s.t;
            j["v"] = s.value;
            out << j.dump() << '\n';
        }
    }
}

std::map<std::string, PositionSeries> split_by_transponder(const PositionSeries& series) {
    std::map<std::string, PositionSeries> parts;
    for (const auto& s : series) parts[s.transponder_id].push_back(s);
    return parts;
}

void sort_by_time(PositionSeries& series) {
    std::stable_sort(series.begin(), series.end(),
                     [](const PositionSample& a, const PositionSample& b) { return a.t < b.t; });
}

void sort_by_time(SignalSeries& series) {
    std::stable_sort(series.begin(), series.end(),
                     [](const SignalSample& a, const SignalSample& b) { return a.t < b.t; });
}

}  // namespace twinforge
