#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "d3fl/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace d3fl;
using ingest::IngestConfig;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("d3fl_ingest_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << content;
        return p.string();
    }
};

}  // namespace

TEST_CASE("load_csv basics") {
    TempDir tmp;
    IngestConfig cfg;

    SUBCASE("two well-formed rows") {
        const auto p = tmp.file("ok.csv",
                                "timestamp,value\n"
                                "2023-05-11T09:00:00Z,1.5\n"
                                "2023-05-11T09:15:00Z,2.5\n");
        const auto ts = ingest::load_csv(p, cfg);
        CHECK(ts.values == std::vector<double>({1.5, 2.5}));
        CHECK(ts.start_epoch == 1683795600);
        CHECK(ts.step == 900);
        CHECK(ts.dist_label == DistLabel::real);
    }
    SUBCASE("shuffled rows sort to the same series") {
        const auto sorted = ingest::load_csv(tmp.file("s1.csv",
                                                      "timestamp,value\n"
                                                      "2023-05-11T09:00:00Z,1\n"
                                                      "2023-05-11T09:15:00Z,2\n"
                                                      "2023-05-11T09:30:00Z,3\n"),
                                             cfg);
        const auto shuffled = ingest::load_csv(tmp.file("s2.csv",
                                                        "timestamp,value\n"
                                                        "2023-05-11T09:30:00Z,3\n"
                                                        "2023-05-11T09:00:00Z,1\n"
                                                        "2023-05-11T09:15:00Z,2\n"),
                                               cfg);
        CHECK(sorted.values == shuffled.values);
        CHECK(sorted.start_epoch == shuffled.start_epoch);
    }
    SUBCASE("epoch timestamps and extra columns") {
        IngestConfig named;
        named.timestamp_column = "ts";
        named.value_column = "kwh";
        const auto p = tmp.file("cols.csv",
                                "site,kwh,ts\n"
                                "a,7.25,1683795600\n"
                                "a,8.5,1683796500\n");
        const auto ts = ingest::load_csv(p, named);
        CHECK(ts.values == std::vector<double>({7.25, 8.5}));
    }
    SUBCASE("missing slots become gaps") {
        const auto p = tmp.file("gap.csv",
                                "timestamp,value\n"
                                "2023-05-11T09:00:00Z,1\n"
                                "2023-05-11T09:45:00Z,4\n");
        const auto ts = ingest::load_csv(p, cfg);
        REQUIRE(ts.values.size() == 4);
        CHECK(ts.values[0] == 1.0);
        CHECK(std::isnan(ts.values[1]));
        CHECK(std::isnan(ts.values[2]));
        CHECK(ts.values[3] == 4.0);
    }
}

TEST_CASE("load_csv error reporting") {
    TempDir tmp;
    IngestConfig cfg;

    CHECK_THROWS_WITH_AS(
        ingest::load_csv(tmp.file("h.csv", "time,value\n1683795600,1\n"), cfg),
        doctest::Contains("schema error"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        ingest::load_csv(tmp.file("dup.csv",
                                  "timestamp,value\n"
                                  "2023-05-11T09:00:00Z,1\n"
                                  "2023-05-11T09:00:00Z,2\n"),
                         cfg),
        doctest::Contains("duplicate timestamp 2023-05-11T09:00:00Z"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        ingest::load_csv(tmp.file("badv.csv",
                                  "timestamp,value\n"
                                  "2023-05-11T09:00:00Z,1\n"
                                  "2023-05-11T09:15:00Z,oops\n"),
                         cfg),
        doctest::Contains("line 3"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        ingest::load_csv(tmp.file("badts.csv",
                                  "timestamp,value\n"
                                  "2023-05-11T09:00:00,1\n"),
                         cfg),
        doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        ingest::load_csv(tmp.file("mis.csv",
                                  "timestamp,value\n"
                                  "2023-05-11T09:00:00Z,1\n"
                                  "2023-05-11T09:10:00Z,2\n"),
                         cfg),
        doctest::Contains("not on the 900 s grid"), std::runtime_error);
    CHECK_THROWS_AS(ingest::load_csv(tmp.file("empty.csv", "timestamp,value\n"), cfg),
                    std::runtime_error);
}

TEST_CASE("resampling to hourly means") {
    IngestConfig cfg;
    TimeSeries quarter;
    quarter.start_epoch = 1683795600;  // on the hour
    quarter.step = 900;
    quarter.values = {1, 2, 3, 4, 5, 6, 7, 8};

    const auto hourly = ingest::resample_hourly(quarter, cfg);
    CHECK(hourly.step == 3600);
    CHECK(hourly.values == std::vector<double>({2.5, 6.5}));

    SUBCASE("already hourly is the identity") {
        const auto again = ingest::resample_hourly(hourly, cfg);
        CHECK(again.values == hourly.values);
        CHECK(again.start_epoch == hourly.start_epoch);
    }
    SUBCASE("missing readings shrink the mean window") {
        quarter.values[1] = std::nan("");
        const auto partial = ingest::resample_hourly(quarter, cfg);
        CHECK(partial.values[0] == doctest::Approx((1.0 + 3.0 + 4.0) / 3.0).epsilon(1e-15));
        CHECK(partial.values[1] == 6.5);
    }
    SUBCASE("start inside an hour aligns buckets to the hour boundary") {
        quarter.start_epoch = 1683795600 + 1800;  // 09:30
        const auto shifted = ingest::resample_hourly(quarter, cfg);
        CHECK(shifted.start_epoch == 1683795600);
        REQUIRE(shifted.values.size() == 3);
        CHECK(shifted.values[0] == 1.5);             // 09:30, 09:45
        CHECK(shifted.values[1] == 4.5);             // 10:00..10:45
        CHECK(shifted.values[2] == 7.5);             // 11:00, 11:15
    }
    SUBCASE("non-multiple target step is rejected") {
        IngestConfig odd;
        odd.target_step = 1000;
        CHECK_THROWS_AS(ingest::resample_hourly(quarter, odd), std::invalid_argument);
    }
}

TEST_CASE("gap filling") {
    IngestConfig cfg;
    TimeSeries ts;
    ts.start_epoch = 1683795600;
    ts.step = 3600;

    SUBCASE("forward fill") {
        ts.values = {1.0, std::nan(""), 3.0};
        cfg.max_missing = 0.5;
        const auto filled = ingest::fill_gaps(ts, cfg);
        CHECK(filled.values == std::vector<double>({1.0, 1.0, 3.0}));
    }
    SUBCASE("leading gaps are dropped, observations untouched") {
        ts.values = {std::nan(""), std::nan(""), 5.0, std::nan(""), 7.0, 8.0};
        cfg.max_missing = 0.5;
        const auto filled = ingest::fill_gaps(ts, cfg);
        CHECK(filled.start_epoch == ts.timestamp_at(2));
        CHECK(filled.values == std::vector<double>({5.0, 5.0, 7.0, 8.0}));
    }
    SUBCASE("excessive gaps raise a quality error with the fraction") {
        ts.values.assign(20, 1.0);
        ts.values[5] = ts.values[9] = std::nan("");
        CHECK_THROWS_WITH_AS(ingest::fill_gaps(ts, cfg), doctest::Contains("0.1"),
                             std::runtime_error);
    }
    SUBCASE("gap-free input is returned unchanged") {
        ts.values = {1, 2, 3, 4};
        const auto same = ingest::fill_gaps(ts, cfg);
        CHECK(same.values == ts.values);
    }
    SUBCASE("all-gap series is rejected") {
        ts.values.assign(4, std::nan(""));
        CHECK_THROWS_AS(ingest::fill_gaps(ts, cfg), std::runtime_error);
    }
}

TEST_CASE("full pipeline produces a trainable hourly series") {
    TempDir tmp;
    IngestConfig cfg;
    std::string csv = "timestamp,value\n";
    // two days of quarter-hour readings with one missing hour
    for (int i = 0; i < 192; ++i) {
        if (i >= 40 && i < 44) continue;
        const std::int64_t ts = 1683795600 + 900LL * i;
        csv += std::to_string(ts) + "," + std::to_string(5.0 + (i % 8)) + "\n";
    }
    const auto series = ingest::ingest_file(tmp.file("real.csv", csv), cfg);
    CHECK(series.step == 3600);
    CHECK(series.values.size() == 48);
    CHECK_NOTHROW(validate_for_training(series, 24, 2));
    // the filled hour repeats its predecessor
    CHECK(series.values[10] == series.values[9]);
}
