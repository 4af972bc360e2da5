#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace d3fl {

enum class DistLabel { gev, lognorm, real };

std::string_view dist_label_name(DistLabel label);
DistLabel parse_dist_label(std::string_view name);

// Uniformly spaced univariate series. Timestamps are seconds since the Unix
// epoch, UTC; the element at index i sits at start_epoch + i*step.
struct TimeSeries {
    std::int64_t start_epoch = 0;
    std::int64_t step = 3600;
    std::vector<double> values;
    int client_id = 0;
    DistLabel dist_label = DistLabel::real;

    std::int64_t timestamp_at(std::size_t i) const {
        return start_epoch + static_cast<std::int64_t>(i) * step;
    }
};

// step > 0, all values finite, length >= lookback + horizon + 10
void validate_for_training(const TimeSeries& ts, std::size_t lookback, std::size_t horizon);

std::string format_iso8601(std::int64_t epoch_seconds);
// accepts YYYY-MM-DDTHH:MM:SSZ or a plain integer epoch
std::int64_t parse_iso8601(const std::string& text);

// decimal text with 9 significant digits, the project-wide CSV number format
std::string format_value(double v);

// `timestamp,value` CSV, ISO-8601 UTC timestamps
void write_series_csv(const TimeSeries& ts, const std::string& path);
// strict reader for the format written above; requires the header and
// uniform spacing (client_id / dist_label are left for the caller)
TimeSeries read_series_csv(const std::string& path);

}  // namespace d3fl
