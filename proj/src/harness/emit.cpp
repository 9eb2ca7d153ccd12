#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "rislink/harness.hpp"

namespace rislink {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kMetricColumns = {"nmse_mean",        "ber",       "coded_ber",
                                                 "bit_errors",       "bit_count", "coded_bit_errors",
                                                 "coded_bit_count",  "frames_run", "digest"};

// "/channel/elements" -> "channel.elements"
std::string dotted(const std::string& pointer) {
    std::string out = pointer.substr(1);
    for (auto& c : out)
        if (c == '/') c = '.';
    return out;
}

std::vector<std::string> config_columns() {
    std::vector<std::string> out;
    const json flat = to_json(desk_config()).flatten();
    for (const auto& [key, value] : flat.items()) out.push_back(dotted(key));
    return out;
}

ordered_json flat_record(const MetricsRecord& r, bool timing) {
    ordered_json out;
    const json flat = to_json(r.config).flatten();
    for (const auto& [key, value] : flat.items()) out[dotted(key)] = value;
    out["nmse_mean"] = r.nmse_mean;
    out["ber"] = r.ber;
    out["coded_ber"] = r.coded_ber;
    out["bit_errors"] = r.bit_errors;
    out["bit_count"] = r.bit_count;
    out["coded_bit_errors"] = r.coded_bit_errors;
    out["coded_bit_count"] = r.coded_bit_count;
    out["frames_run"] = r.frames_run;
    out["digest"] = r.digest;
    if (timing) out["wall_time_s"] = r.wall_time_s ? ordered_json(*r.wall_time_s) : ordered_json(nullptr);
    return out;
}

std::string csv_cell(const ordered_json& v) {
    if (v.is_null()) return {};
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("parse_results: unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

json cell_value(const std::string& cell) {
    if (cell.empty()) return nullptr;
    json v = json::parse(cell, nullptr, false);
    if (v.is_discarded()) return cell;
    return v;
}

std::uint64_t u64_of(const json& v, const char* key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw std::runtime_error(std::string("parse_results: bad value for ") + key);
}

double f64_of(const json& v, const char* key) {
    if (v.is_number()) return v.get<double>();
    throw std::runtime_error(std::string("parse_results: bad value for ") + key);
}

MetricsRecord record_from_flat(const json& flat) {
    json doc = json::object();
    for (const auto& key : config_columns()) {
        if (!flat.contains(key)) throw std::runtime_error("parse_results: missing column " + key);
        set_dotted(doc, key, flat.at(key));
    }
    MetricsRecord r;
    r.config = config_from_json(doc, desk_config());
    for (const auto& key : kMetricColumns)
        if (!flat.contains(key)) throw std::runtime_error("parse_results: missing column " + key);
    r.nmse_mean = f64_of(flat.at("nmse_mean"), "nmse_mean");
    r.ber = f64_of(flat.at("ber"), "ber");
    r.coded_ber = f64_of(flat.at("coded_ber"), "coded_ber");
    r.bit_errors = u64_of(flat.at("bit_errors"), "bit_errors");
    r.bit_count = u64_of(flat.at("bit_count"), "bit_count");
    r.coded_bit_errors = u64_of(flat.at("coded_bit_errors"), "coded_bit_errors");
    r.coded_bit_count = u64_of(flat.at("coded_bit_count"), "coded_bit_count");
    r.frames_run = u64_of(flat.at("frames_run"), "frames_run");
    if (!flat.at("digest").is_string()) throw std::runtime_error("parse_results: bad digest");
    r.digest = flat.at("digest").get<std::string>();
    if (flat.contains("wall_time_s") && !flat.at("wall_time_s").is_null())
        r.wall_time_s = f64_of(flat.at("wall_time_s"), "wall_time_s");
    return r;
}

}  // namespace

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "jsonl") return OutputFormat::jsonl;
    throw ConfigError("unknown output format '" + std::string(name) + "'");
}

std::vector<std::string> record_columns(bool timing) {
    auto cols = config_columns();
    cols.insert(cols.end(), kMetricColumns.begin(), kMetricColumns.end());
    if (timing) cols.emplace_back("wall_time_s");
    return cols;
}

void emit_results(const std::vector<MetricsRecord>& records, OutputFormat format, std::ostream& out, bool timing) {
    if (format == OutputFormat::csv) {
        const auto cols = record_columns(timing);
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        out << '\n';
        for (const auto& r : records) {
            const ordered_json flat = flat_record(r, timing);
            for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_cell(flat.at(cols[i]));
            out << '\n';
        }
    } else {
        for (const auto& r : records) out << flat_record(r, timing).dump() << '\n';
    }
    if (!out) throw std::runtime_error("emit_results: write failed");
}

void emit_results(const std::vector<MetricsRecord>& records, OutputFormat format, const std::string& path,
                  bool timing) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("emit_results: cannot open '" + path + "'");
    emit_results(records, format, out, timing);
    out.close();
    if (!out) throw std::runtime_error("emit_results: write to '" + path + "' failed");
}

std::vector<MetricsRecord> parse_results(std::istream& in, OutputFormat format) {
    std::vector<MetricsRecord> out;
    std::string line;
    if (format == OutputFormat::csv) {
        if (!std::getline(in, line)) return out;
        const auto header = split_csv_line(line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv_line(line);
            if (cells.size() != header.size()) throw std::runtime_error("parse_results: ragged CSV row");
            json flat = json::object();
            for (std::size_t i = 0; i < cells.size(); ++i) flat[header[i]] = cell_value(cells[i]);
            out.push_back(record_from_flat(flat));
        }
    } else {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json flat = json::parse(line, nullptr, false);
            if (flat.is_discarded() || !flat.is_object()) throw std::runtime_error("parse_results: bad JSONL line");
            out.push_back(record_from_flat(flat));
        }
    }
    return out;
}

bool operator==(const MetricsRecord& a, const MetricsRecord& b) {
    return to_json(a.config) == to_json(b.config) && a.nmse_mean == b.nmse_mean && a.ber == b.ber &&
           a.coded_ber == b.coded_ber && a.bit_errors == b.bit_errors && a.bit_count == b.bit_count &&
           a.coded_bit_errors == b.coded_bit_errors && a.coded_bit_count == b.coded_bit_count &&
           a.frames_run == b.frames_run && a.digest == b.digest && a.wall_time_s == b.wall_time_s;
}

}  // namespace rislink
