#include "d3fl/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace d3fl::ingest {

namespace {

constexpr double kGap = std::numeric_limits<double>::quiet_NaN();

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

TimeSeries load_csv(const std::string& path, const IngestConfig& cfg) {
    if (cfg.source_step <= 0) throw std::invalid_argument("ingest: source_step must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("schema error: " + path + " is empty");
    const auto header = split_csv_line(line);
    std::size_t ts_col = header.size(), val_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == cfg.timestamp_column) ts_col = i;
        if (header[i] == cfg.value_column) val_col = i;
    }
    if (ts_col == header.size())
        throw std::runtime_error("schema error: missing column '" + cfg.timestamp_column + "'");
    if (val_col == header.size())
        throw std::runtime_error("schema error: missing column '" + cfg.value_column + "'");

    std::vector<std::pair<std::int64_t, double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() <= std::max(ts_col, val_col))
            throw std::runtime_error("data error: line " + std::to_string(line_no) +
                                     ": too few columns");
        std::int64_t ts;
        double v;
        try {
            ts = parse_iso8601(cells[ts_col]);
        } catch (const std::exception&) {
            throw std::runtime_error("data error: line " + std::to_string(line_no) +
                                     ": bad timestamp '" + cells[ts_col] + "'");
        }
        try {
            std::size_t used = 0;
            v = std::stod(cells[val_col], &used);
            if (used != cells[val_col].size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error("data error: line " + std::to_string(line_no) +
                                     ": bad value '" + cells[val_col] + "'");
        }
        rows.emplace_back(ts, v);
    }
    if (rows.empty()) throw std::runtime_error("data error: " + path + " has no data rows");

    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw std::runtime_error("data error: duplicate timestamp " +
                                     format_iso8601(rows[i].first));

    const std::int64_t t0 = rows.front().first;
    for (const auto& [ts, v] : rows)
        if ((ts - t0) % cfg.source_step != 0)
            throw std::runtime_error("data error: timestamp " + format_iso8601(ts) +
                                     " is not on the " + std::to_string(cfg.source_step) +
                                     " s grid");

    TimeSeries out;
    out.start_epoch = t0;
    out.step = cfg.source_step;
    out.dist_label = DistLabel::real;
    const auto slots =
        static_cast<std::size_t>((rows.back().first - t0) / cfg.source_step) + 1;
    out.values.assign(slots, kGap);
    for (const auto& [ts, v] : rows)
        out.values[static_cast<std::size_t>((ts - t0) / cfg.source_step)] = v;
    return out;
}

TimeSeries resample_hourly(const TimeSeries& series, const IngestConfig& cfg) {
    if (series.step <= 0 || series.values.empty())
        throw std::invalid_argument("resample: empty or unspaced series");
    if (cfg.target_step < series.step || cfg.target_step % series.step != 0)
        throw std::invalid_argument("resample: target step " + std::to_string(cfg.target_step) +
                                    " is not a multiple of the source step " +
                                    std::to_string(series.step));
    if (cfg.target_step == series.step) return series;

    const std::int64_t first_bucket = floor_div(series.start_epoch, cfg.target_step);
    const std::int64_t last_bucket = floor_div(series.timestamp_at(series.values.size() - 1),
                                               cfg.target_step);
    TimeSeries out;
    out.start_epoch = first_bucket * cfg.target_step;
    out.step = cfg.target_step;
    out.client_id = series.client_id;
    out.dist_label = series.dist_label;
    out.values.assign(static_cast<std::size_t>(last_bucket - first_bucket) + 1, kGap);

    std::vector<double> sums(out.values.size(), 0.0);
    std::vector<std::size_t> counts(out.values.size(), 0);
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (std::isnan(series.values[i])) continue;
        const auto b = static_cast<std::size_t>(
            floor_div(series.timestamp_at(i), cfg.target_step) - first_bucket);
        sums[b] += series.values[i];
        ++counts[b];
    }
    for (std::size_t b = 0; b < out.values.size(); ++b)
        if (counts[b] > 0) out.values[b] = sums[b] / static_cast<double>(counts[b]);
    return out;
}

TimeSeries fill_gaps(const TimeSeries& series, const IngestConfig& cfg) {
    std::size_t first = 0;
    while (first < series.values.size() && std::isnan(series.values[first])) ++first;
    if (first == series.values.size())
        throw std::runtime_error("quality error: series contains no observed values");

    TimeSeries out;
    out.start_epoch = series.timestamp_at(first);
    out.step = series.step;
    out.client_id = series.client_id;
    out.dist_label = series.dist_label;
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(first),
                      series.values.end());

    std::size_t gaps = 0;
    for (auto v : out.values)
        if (std::isnan(v)) ++gaps;
    const double fraction = static_cast<double>(gaps) / static_cast<double>(out.values.size());
    if (fraction > cfg.max_missing)
        throw std::runtime_error("quality error: gap fraction " + format_value(fraction) +
                                 " exceeds the limit " + format_value(cfg.max_missing));

    for (std::size_t i = 1; i < out.values.size(); ++i)
        if (std::isnan(out.values[i])) out.values[i] = out.values[i - 1];
    return out;
}

TimeSeries ingest_file(const std::string& path, const IngestConfig& cfg) {
    return fill_gaps(resample_hourly(load_csv(path, cfg), cfg), cfg);
}

}  // namespace d3fl::ingest
