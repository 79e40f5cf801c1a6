#include "twinforge/artifacts.hpp"

#include "twinforge/errors.hpp"
#include "twinforge/ingestion.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>

namespace twinforge {

namespace {

nlohmann::ordered_json vec3_json(const Vec3& v) {
    return nlohmann::ordered_json::array({v.x(), v.y(), v.z()});
}

Vec3 vec3_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("expected [x, y, z]: " + j.dump());
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

SubsequenceRecord to_record(const Subsequence& sub) {
    SubsequenceRecord rec;
    rec.id = sub.id;
    rec.transponder_id = sub.transponder_id;
    rec.t_start = sub.t_start;
    rec.t_end = sub.t_end;
    rec.start_pos = sub.start_pos;
    rec.end_pos = sub.end_pos;
    rec.sample_count = sub.samples.size();
    rec.update_interval_ms = sub.update_interval_ms;
    return rec;
}

void write_subsequence_records(std::ostream& out, const std::vector<SubsequenceRecord>& records) {
    for (const auto& rec : records) {
        nlohmann::ordered_json j;
        j["id"] = rec.id;
        j["transponder"] = rec.transponder_id;
        j["t_start"] = rec.t_start;
        j["t_end"] = rec.t_end;
        j["start"] = vec3_json(rec.start_pos);
        j["end"] = vec3_json(rec.end_pos);
        j["samples"] = rec.sample_count;
        j["update_interval_ms"] = rec.update_interval_ms;
        j["label"] = rec.label ? nlohmann::ordered_json(*rec.label) : nlohmann::ordered_json(nullptr);
        j["label_tied"] = rec.label_tied;
        j["window_labels"] = rec.window_labels;
        out << j.dump() << '\n';
    }
}

std::vector<SubsequenceRecord> read_subsequence_records(std::istream& in) {
    std::vector<SubsequenceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw MalformedRecord(line_no, "not a JSON subsequence record");
        try {
            SubsequenceRecord rec;
            rec.id = j.at("id").get<std::string>();
            rec.transponder_id = j.at("transponder").get<std::string>();
            rec.t_start = j.at("t_start").get<TimestampMs>();
            rec.t_end = j.at("t_end").get<TimestampMs>();
            rec.start_pos = vec3_from(j.at("start"));
            rec.end_pos = vec3_from(j.at("end"));
            rec.sample_count = j.at("samples").get<std::size_t>();
            rec.update_interval_ms = j.value("update_interval_ms", 0.0);
            if (j.contains("label") && !j["label"].is_null()) rec.label = j["label"].get<std::string>();
            rec.label_tied = j.value("label_tied", false);
            for (const auto& w : j.value("window_labels", nlohmann::json::array()))
                rec.window_labels.push_back(w.get<std::string>());
            records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return records;
}

std::vector<Subsequence> reextract_subsequences(const std::vector<SubsequenceRecord>& records,
                                                const PositionSeries& positions) {
    auto by_transponder = split_by_transponder(positions);
    std::vector<Subsequence> subs;
    subs.reserve(records.size());
    for (const auto& rec : records) {
        auto it = by_transponder.find(rec.transponder_id);
        if (it == by_transponder.end())
            throw Error("subsequence '" + rec.id + "' references unknown transponder '" +
                        rec.transponder_id + "'");
        Subsequence sub;
        sub.id = rec.id;
        sub.transponder_id = rec.transponder_id;
        sub.t_start = rec.t_start;
        sub.t_end = rec.t_end;
        sub.update_interval_ms = rec.update_interval_ms;
        for (const auto& s : it->second)
            if (s.t >= rec.t_start && s.t <= rec.t_end) sub.samples.push_back(s);
        if (sub.samples.empty())
            throw Error("subsequence '" + rec.id + "' has no samples in its span");
        if (sub.samples.size() != rec.sample_count)
            throw Error("subsequence '" + rec.id + "' re-extracted " +
                        std::to_string(sub.samples.size()) + " samples, record says " +
                        std::to_string(rec.sample_count));
        sub.start_pos = sub.samples.front().pos;
        sub.end_pos = sub.samples.back().pos;
        subs.push_back(std::move(sub));
    }
    return subs;
}

void write_sensor_csv(std::ostream& out, const std::vector<SensorRow>& rows) {
    out << "signal_name,x_m,y_m,z_m,support,dispersion_m,group\n";
    for (const auto& r : rows) {
        out << r.signal_name << ',' << format_double(r.position.x()) << ','
            << format_double(r.position.y()) << ',' << format_double(r.position.z()) << ','
            << r.support << ',' << format_double(r.dispersion) << ',' << r.group << '\n';
    }
}

std::vector<SensorRow> read_sensor_csv(std::istream& in) {
    std::vector<SensorRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line == "signal_name,x_m,y_m,z_m,support,dispersion_m,group") continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 7) throw MalformedRecord(line_no, "expected 7 fields");
        SensorRow r;
        r.signal_name = fields[0];
        r.position = Vec3(std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]));
        r.support = static_cast<std::size_t>(std::stoull(fields[4]));
        r.dispersion = std::stod(fields[5]);
        r.group = fields[6];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace twinforge
