#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

// Exercises the installed binary end to end: flag parsing, exit codes,
// artifact layout and rerun determinism. D3FL_BIN is injected by CMake.

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code;
    std::string out;  // stdout and stderr interleaved
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(D3FL_BIN) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("d3fl_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << content;
        return p.string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

// a configuration small enough that a full 36-run suite takes well under a second
const char* kTinyConf =
    "model.hidden = 8\n"
    "model.lookback = 8\n"
    "model.batch = 16\n"
    "fed.rounds = 2\n"
    "synth.n_points = 60\n"
    "eval.n_clients = 2\n";

}  // namespace

TEST_CASE("help screens list subcommands and config keys") {
    const auto top = run_cli("--help");
    CHECK(top.code == 0);
    for (const char* word :
         {"generate", "ingest", "detrend", "train", "federate", "experiment", "report"})
        CHECK(top.out.find(word) != std::string::npos);
    CHECK(top.out.find("synth.n_points") != std::string::npos);
    CHECK(top.out.find("detrend.technique") != std::string::npos);

    const auto sub = run_cli("experiment --help");
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--seeds") != std::string::npos);
    CHECK(sub.out.find("synth.n_points") != std::string::npos);
}

TEST_CASE("argument and config errors exit with 2") {
    TempDir tmp;
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("generate --bogus 1").code == 2);
    CHECK(run_cli("ingest").code == 2);                       // --input is required
    CHECK(run_cli("ingest --input /no/such/file.csv").code == 2);

    const auto bad_key = tmp.file("bad_key.conf", "model.width = 3\n");
    const auto r1 = run_cli("generate --config " + bad_key + " --out " + tmp.sub("g"));
    CHECK(r1.code == 2);
    CHECK(r1.out.find("config error:") != std::string::npos);
    CHECK(r1.out.find("model.width") != std::string::npos);

    const auto r2 = run_cli("train --rounds 0 --out " + tmp.sub("t"));
    CHECK(r2.code == 2);
    CHECK(r2.out.find("config error:") != std::string::npos);
}

TEST_CASE("generate writes one labeled CSV per client plus the resolved config") {
    TempDir tmp;
    const auto out = tmp.sub("cohort");
    const auto r = run_cli("generate --regime mixed --clients 6 --points 40 --seed 3 --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote 6 series") != std::string::npos);

    // first half of a mixed cohort draws GEV noise, the rest log-normal
    for (int k = 1; k <= 3; ++k)
        CHECK(fs::exists(fs::path(out) / ("client_" + std::to_string(k) + "_gev.csv")));
    for (int k = 4; k <= 6; ++k)
        CHECK(fs::exists(fs::path(out) / ("client_" + std::to_string(k) + "_lognorm.csv")));

    const auto resolved = slurp(fs::path(out) / "config.resolved");
    CHECK(resolved.find("synth.regime = mixed\n") != std::string::npos);
    CHECK(resolved.find("seed = 3\n") != std::string::npos);
    CHECK(resolved.find("synth.n_points = 40\n") != std::string::npos);

    const auto csv = lines_of(slurp(fs::path(out) / "client_1_gev.csv"));
    REQUIRE(csv.size() == 41);  // header + 40 rows
    CHECK(csv[0] == "timestamp,value");
}

TEST_CASE("detrend shifts timestamps to match the shortened series") {
    TempDir tmp;
    const auto gen_out = tmp.sub("g");
    REQUIRE(run_cli("generate --clients 1 --points 40 --seed 1 --out " + gen_out).code == 0);
    const auto input = (fs::path(gen_out) / "client_1_gev.csv").string();

    const auto det_out = tmp.sub("d");
    const auto r =
        run_cli("detrend --input " + input + " --technique differencing --out " + det_out);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(det_out) / "detrend_state.txt"));

    const auto orig = lines_of(slurp(input));
    const auto det = lines_of(slurp(fs::path(det_out) / "detrended.csv"));
    REQUIRE(det.size() == 40);  // header + 39: differencing drops one point
    // each detrended row sits on the timestamp of the later original sample
    CHECK(det[1].substr(0, det[1].find(',')) == orig[2].substr(0, orig[2].find(',')));
}

TEST_CASE("runtime failures exit with 1") {
    TempDir tmp;
    // 25% of the hourly buckets are missing, far over the default 5% budget
    const auto raw = tmp.file("gappy.csv",
                              "timestamp,value\n"
                              "2023-05-11T09:00:00Z,1.0\n"
                              "2023-05-11T11:00:00Z,3.0\n"
                              "2023-05-11T12:00:00Z,4.0\n"
                              "2023-05-11T13:00:00Z,5.0\n");
    const auto r = run_cli("ingest --input " + raw + " --out " + tmp.sub("i"));
    CHECK(r.code == 1);
    CHECK(r.out.find("error: quality error:") != std::string::npos);

    const auto rep = run_cli("report --out " + tmp.sub("nowhere"));
    CHECK(rep.code == 1);
    CHECK(rep.out.find("no summary.csv") != std::string::npos);
}

TEST_CASE("experiment reruns are byte identical") {
    TempDir tmp;
    const auto conf = tmp.file("tiny.conf", kTinyConf);
    const auto r1 = tmp.sub("r1");
    const auto r2 = tmp.sub("r2");

    const auto a = run_cli("experiment --config " + conf + " --seed 7 --out " + r1);
    REQUIRE(a.code == 0);
    CHECK(a.out.find("36/36 runs ok") != std::string::npos);
    REQUIRE(run_cli("experiment --config " + conf + " --seed 7 --out " + r2).code == 0);

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(r1)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), r1);
        CHECK(slurp(entry.path()) == slurp(fs::path(r2) / rel));
        ++compared;
    }
    // 36 run dirs holding rounds.csv, model.ckpt and a forecast, plus the
    // top-level summary.csv and config.resolved
    CHECK(compared == 36 * 3 + 2);

    const auto summary = lines_of(slurp(fs::path(r1) / "summary.csv"));
    REQUIRE(summary.size() == 37);
    CHECK(summary[0] == "exp,mode,technique,regime,mse,rmse,mae");

    const auto rep = run_cli("report --out " + r1);
    CHECK(rep.code == 0);
    CHECK(rep.out.find("summary.csv") != std::string::npos);
    CHECK(rep.out.find("quadratic_model") != std::string::npos);
}

TEST_CASE("experiment isolates per-run failures and exits 1") {
    TempDir tmp;
    // 30 points survive every technique except the 24-wide moving average,
    // which leaves 7 points: too short for an 8+2 window
    const auto conf = tmp.file("short.conf",
                               "model.hidden = 8\n"
                               "model.lookback = 8\n"
                               "fed.rounds = 1\n"
                               "synth.n_points = 30\n"
                               "eval.n_clients = 2\n");
    const auto out = tmp.sub("partial");
    const auto r = run_cli("experiment --config " + conf + " --seed 2 --out " + out);
    CHECK(r.code == 1);
    CHECK(r.out.find("30/36 runs ok") != std::string::npos);
    CHECK(r.out.find("exp 7") != std::string::npos);
    CHECK(r.out.find("too short after detrending") != std::string::npos);

    // failed runs contribute no summary rows
    const auto summary = lines_of(slurp(fs::path(out) / "summary.csv"));
    CHECK(summary.size() == 31);
    for (const auto& line : summary) CHECK(line.find("moving_average") == std::string::npos);
}

TEST_CASE("multi-seed layout nests one suite per seed") {
    TempDir tmp;
    const auto conf = tmp.file("tiny.conf", kTinyConf);
    const auto out = tmp.sub("sweep");
    const auto r = run_cli("experiment --config " + conf + " --seed 5 --seeds 2 --out " + out);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(fs::path(out) / "config.resolved"));
    for (const char* seed_dir : {"seed5", "seed6"}) {
        CHECK(fs::exists(fs::path(out) / seed_dir / "summary.csv"));
        const auto resolved = slurp(fs::path(out) / seed_dir / "config.resolved");
        CHECK(resolved.find(std::string("seed = ") + (seed_dir + 4) + "\n") !=
              std::string::npos);
    }
    // different seeds, different data, different results
    CHECK(slurp(fs::path(out) / "seed5" / "summary.csv") !=
          slurp(fs::path(out) / "seed6" / "summary.csv"));

    const auto rep = run_cli("report --out " + out);
    CHECK(rep.code == 0);
    CHECK(rep.out.find("seed5") != std::string::npos);
    CHECK(rep.out.find("seed6") != std::string::npos);
}
