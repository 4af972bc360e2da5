#pragma once

#include <cstdint>
#include <string>

#include "d3fl/timeseries.hpp"

namespace d3fl::ingest {

struct IngestConfig {
    std::string timestamp_column = "timestamp";
    std::string value_column = "value";
    std::int64_t source_step = 900;  // seconds between raw readings
    std::int64_t target_step = 3600;
    double max_missing = 0.05;  // tolerated gap fraction after resampling
};

// Reads a header-ed CSV with the configured columns (extra columns are
// ignored), accepts ISO-8601 or epoch timestamps, sorts rows, and lays the
// values onto a uniform source_step grid; missing slots become NaN gaps.
// Malformed headers raise a schema error; bad rows, duplicate or misaligned
// timestamps raise data errors naming the line or timestamp.
TimeSeries load_csv(const std::string& path, const IngestConfig& cfg);

// Buckets the series onto absolute target_step boundaries, averaging the
// finite readings inside each bucket; empty buckets stay NaN. The target
// step must be a multiple of the series' own step. Already-resampled input
// passes through unchanged.
TimeSeries resample_hourly(const TimeSeries& series, const IngestConfig& cfg);

// Drops leading gaps, then forward-fills the rest from the last observed
// value. A gap fraction above cfg.max_missing raises a quality error that
// reports the fraction.
TimeSeries fill_gaps(const TimeSeries& series, const IngestConfig& cfg);

// load -> resample -> fill_gaps
TimeSeries ingest_file(const std::string& path, const IngestConfig& cfg);

}  // namespace d3fl::ingest
