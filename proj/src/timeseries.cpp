#include "d3fl/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace d3fl {

namespace {

// civil <-> day algorithms from Howard Hinnant's date notes (public domain)
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yr + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

}  // namespace

std::string_view dist_label_name(DistLabel label) {
    switch (label) {
        case DistLabel::gev: return "gev";
        case DistLabel::lognorm: return "lognorm";
        case DistLabel::real: return "real";
    }
    return "real";
}

DistLabel parse_dist_label(std::string_view name) {
    if (name == "gev") return DistLabel::gev;
    if (name == "lognorm") return DistLabel::lognorm;
    if (name == "real") return DistLabel::real;
    throw std::invalid_argument("unknown distribution label: " + std::string(name));
}

void validate_for_training(const TimeSeries& ts, std::size_t lookback, std::size_t horizon) {
    if (ts.step <= 0) throw std::invalid_argument("time series step must be positive");
    if (ts.values.size() < lookback + horizon + 10) {
        std::ostringstream os;
        os << "time series of length " << ts.values.size() << " is too short for training"
           << " (need at least " << lookback + horizon + 10 << ")";
        throw std::length_error(os.str());
    }
    for (std::size_t i = 0; i < ts.values.size(); ++i) {
        if (!std::isfinite(ts.values[i])) {
            std::ostringstream os;
            os << "non-finite value at index " << i;
            throw std::runtime_error(os.str());
        }
    }
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    const std::int64_t days = floor_div(epoch_seconds, 86400);
    std::int64_t rem = epoch_seconds - days * 86400;
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::int64_t parse_iso8601(const std::string& text) {
    int y, mo, d, h, mi, s;
    char tz;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &tz) == 7 &&
        tz == 'Z') {
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
            throw std::invalid_argument("timestamp out of range: " + text);
        return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
    }
    // fall back to a bare epoch integer
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("unparseable timestamp: " + text);
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_series_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "timestamp,value\n";
    for (std::size_t i = 0; i < ts.values.size(); ++i)
        out << format_iso8601(ts.timestamp_at(i)) << ',' << format_value(ts.values[i]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,value")
        throw std::runtime_error(path + ": expected header 'timestamp,value', got '" + line + "'");

    TimeSeries ts;
    std::vector<std::int64_t> stamps;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << lineno << ": missing comma";
            throw std::runtime_error(os.str());
        }
        try {
            stamps.push_back(parse_iso8601(line.substr(0, comma)));
            std::size_t used = 0;
            const std::string num = line.substr(comma + 1);
            ts.values.push_back(std::stod(num, &used));
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            std::ostringstream os;
            os << path << ":" << lineno << ": unparseable row '" << line << "'";
            throw std::runtime_error(os.str());
        }
    }
    if (stamps.empty()) throw std::runtime_error(path + ": no data rows");
    ts.start_epoch = stamps.front();
    ts.step = stamps.size() > 1 ? stamps[1] - stamps[0] : 3600;
    if (ts.step <= 0) throw std::runtime_error(path + ": timestamps not ascending");
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        if (stamps[i] != ts.start_epoch + static_cast<std::int64_t>(i) * ts.step) {
            std::ostringstream os;
            os << path << ": non-uniform spacing at row " << i + 2;
            throw std::runtime_error(os.str());
        }
    }
    return ts;
}

}  // namespace d3fl
