// SPDX-License-Identifier: Apache-2.0
//
// CSV / JSON serialization of curve records. Reals are written with 12
// significant digits; the JSON form carries the same rounded values.

#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bidir/harness.hpp"

namespace bidir {

inline constexpr const char* kCsvHeader =
    "scenario_id,axis_value,snr_db,alpha,lambda,M,cycles,block_index_or_avg,sum_rate_bits_mean,"
    "sum_rate_stderr,throughput_bits_mean,throughput_stderr,n_trials,seed";

enum class Format { csv, json };

inline Format format_from_string(const std::string& s)
{
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw Error(ErrorCode::ConfigInvalid, "unknown output format '" + s + "'");
}

inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// The value a reader recovers from format_real(x).
inline double round12(double x) { return std::stod(format_real(x)); }

namespace detail {

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
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
    out.push_back(std::move(cur));
    return out;
}

} // namespace detail

inline std::string to_csv(const std::vector<CurveRecord>& rows)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << detail::csv_field(r.scenario_id) << ','
           << (r.axis_value ? format_real(*r.axis_value) : std::string()) << ',' << format_real(r.snr_db) << ','
           << format_real(r.alpha) << ',' << format_real(r.lambda) << ',' << r.M << ',' << r.cycles << ','
           << (r.block_index ? std::to_string(*r.block_index) : std::string("avg")) << ','
           << format_real(r.sum_rate_mean) << ',' << format_real(r.sum_rate_stderr) << ','
           << format_real(r.throughput_mean) << ',' << format_real(r.throughput_stderr) << ',' << r.n_trials << ','
           << r.seed << '\n';
    }
    return os.str();
}

inline std::vector<CurveRecord> parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw Error(ErrorCode::ConfigInvalid, "CSV header missing or unrecognized");
    std::vector<CurveRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 14)
            throw Error(ErrorCode::ConfigInvalid, "CSV row has " + std::to_string(f.size()) + " fields");
        CurveRecord r;
        r.scenario_id = f[0];
        if (!f[1].empty())
            r.axis_value = std::stod(f[1]);
        r.snr_db = std::stod(f[2]);
        r.alpha = std::stod(f[3]);
        r.lambda = std::stod(f[4]);
        r.M = std::stol(f[5]);
        r.cycles = std::stoi(f[6]);
        if (f[7] != "avg")
            r.block_index = std::stol(f[7]);
        r.sum_rate_mean = std::stod(f[8]);
        r.sum_rate_stderr = std::stod(f[9]);
        r.throughput_mean = std::stod(f[10]);
        r.throughput_stderr = std::stod(f[11]);
        r.n_trials = std::stoi(f[12]);
        r.seed = std::stoull(f[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json to_json(const std::vector<CurveRecord>& rows)
{
    auto j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o;
        o["scenario_id"] = r.scenario_id;
        o["axis_value"] = r.axis_value ? nlohmann::json(round12(*r.axis_value)) : nlohmann::json(nullptr);
        o["snr_db"] = round12(r.snr_db);
        o["alpha"] = round12(r.alpha);
        o["lambda"] = round12(r.lambda);
        o["M"] = r.M;
        o["cycles"] = r.cycles;
        o["block_index_or_avg"] = r.block_index ? nlohmann::json(*r.block_index) : nlohmann::json("avg");
        o["sum_rate_bits_mean"] = round12(r.sum_rate_mean);
        o["sum_rate_stderr"] = round12(r.sum_rate_stderr);
        o["throughput_bits_mean"] = round12(r.throughput_mean);
        o["throughput_stderr"] = round12(r.throughput_stderr);
        o["n_trials"] = r.n_trials;
        o["seed"] = r.seed;
        j.push_back(std::move(o));
    }
    return j;
}

inline std::vector<CurveRecord> parse_json(const nlohmann::json& j)
{
    std::vector<CurveRecord> rows;
    for (const auto& o : j) {
        CurveRecord r;
        r.scenario_id = o.at("scenario_id").get<std::string>();
        if (!o.at("axis_value").is_null())
            r.axis_value = o.at("axis_value").get<double>();
        r.snr_db = o.at("snr_db").get<double>();
        r.alpha = o.at("alpha").get<double>();
        r.lambda = o.at("lambda").get<double>();
        r.M = o.at("M").get<long>();
        r.cycles = o.at("cycles").get<int>();
        if (!o.at("block_index_or_avg").is_string())
            r.block_index = o.at("block_index_or_avg").get<long>();
        r.sum_rate_mean = o.at("sum_rate_bits_mean").get<double>();
        r.sum_rate_stderr = o.at("sum_rate_stderr").get<double>();
        r.throughput_mean = o.at("throughput_bits_mean").get<double>();
        r.throughput_stderr = o.at("throughput_stderr").get<double>();
        r.n_trials = o.at("n_trials").get<int>();
        r.seed = o.at("seed").get<std::uint64_t>();
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string render(const std::vector<CurveRecord>& rows, Format fmt)
{
    return fmt == Format::csv ? to_csv(rows) : to_json(rows).dump(2) + "\n";
}

/// Writes the records to `path`. IO failures are reported with the OS message.
inline void emit(const std::vector<CurveRecord>& rows, Format fmt, const std::string& path)
{
    if (rows.empty())
        throw Error(ErrorCode::ConfigInvalid, "emit: no records");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
    out << render(rows, fmt);
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed: " + std::strerror(errno));
}

} // namespace bidir
