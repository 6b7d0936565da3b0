#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "driftwatch/cli.hpp"
#include "driftwatch/seriesgen.hpp"
#include "oracles.hpp"

using namespace driftwatch;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("driftwatch_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string zero_series(int n, int jump_at = 0, double jump = 0.0) {
    std::string s = "t,y\n";
    for (int i = 1; i <= n; ++i) s += std::to_string(i) + "," + (i >= jump_at && jump_at > 0 ? std::to_string(jump) : "0") + "\n";
    return s;
}

long lines(const std::string& s) { return static_cast<long>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("generate writes a reproducible series") {
    const Run a = run({"generate", "--n", "100", "--sigma", "1", "--seed", "7"});
    CHECK(a.code == kExitOk);
    CHECK(a.out.rfind("t,y\n", 0) == 0);
    CHECK(lines(a.out) == 101);
    const Run b = run({"generate", "--n", "100", "--sigma", "1", "--seed", "7"});
    CHECK(a.out == b.out);
    CHECK(a.err.find("seed=7") != std::string::npos);
    CHECK(run({"generate", "--n", "100", "--seed", "8"}).out != a.out);
}

TEST_CASE("cp2 drift starts after the change row") {
    const Run null = run({"generate", "--n", "100", "--seed", "5"});
    const Run alt = run({"generate", "--n", "100", "--m0", "step", "--beta", "0", "--cp2", "0.25", "--h", "10", "--seed", "5"});
    REQUIRE(alt.code == kExitOk);
    std::istringstream a(null.out), b(alt.out);
    const TimeSeries sa = read_series_csv(a), sb = read_series_csv(b);
    for (long n = 1; n <= 100; ++n) {
        const double diff = sb.values[n - 1] - sa.values[n - 1];
        if (n <= 25) CHECK(diff == 0.0);
        else CHECK(diff == doctest::Approx(static_cast<double>(n - 25)));
    }
}

TEST_CASE("usage errors exit with code two") {
    CHECK(run({"generate", "--bogus"}).code == kExitUsage);
    CHECK(run({"generate", "--n", "abc"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"monitor", "--input", scratch("missing.csv").string(), "--h", "10", "--c", "1"}).code == kExitUsage);
    CHECK(run({"monitor", "--h", "10"}).code == kExitUsage);
    CHECK(run({"generate", "--n", "10", "--beta", "0.5", "--seed", "1"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("monitor reports truncation and alarms") {
    const fs::path zeros = scratch("zeros.csv");
    write_file(zeros, zero_series(50));
    const Run quiet = run({"monitor", "--input", zeros.string(), "--h", "10", "--c", "1"});
    CHECK(quiet.code == kExitOk);
    const auto q = nlohmann::json::parse(quiet.out);
    CHECK(q["alarm"] == false);
    CHECK(q["index"] == 50);

    const fs::path jump = scratch("jump.csv");
    write_file(jump, zero_series(50, 7, 100.0));
    const Run loud = run({"monitor", "--input", jump.string(), "--h", "10", "--c", "0"});
    CHECK(loud.code == kExitAlarm);
    const auto j = nlohmann::json::parse(loud.out);
    CHECK(j["alarm"] == true);
    CHECK(j["index"] == 7);
    CHECK(j["time"] == 7.0);
    CHECK(j["threshold"] == 0.0);
    CHECK(j["statistic"].get<double>() > 0.0);
}

TEST_CASE("generate then monitor matches a brute-force scan") {
    const fs::path walk = scratch("walk.csv");
    const Run gen = run({"generate", "--n", "20", "--seed", "3", "--output", walk.string()});
    REQUIRE(gen.code == kExitOk);
    std::ifstream f(walk);
    const TimeSeries s = read_series_csv(f);
    std::vector<double> t(s.times.data(), s.times.data() + 20), y(s.values.data(), s.values.data() + 20);
    const auto m = oracle::smoother(oracle::gaussian_pdf, 10.0, t, y);
    long expected = 20;
    bool alarmed = false;
    for (long n = 0; n < 20; ++n) {
        if (10.0 / std::pow(20.0, 1.5) * m[static_cast<std::size_t>(n)] > 0.1) {
            expected = n + 1;
            alarmed = true;
            break;
        }
    }
    const Run a = run({"monitor", "--input", walk.string(), "--h", "10", "--c", "0.1"});
    const Run b = run({"monitor", "--input", walk.string(), "--h", "10", "--c", "0.1"});
    CHECK(a.out == b.out);
    CHECK(a.code == (alarmed ? kExitAlarm : kExitOk));
    CHECK(nlohmann::json::parse(a.out)["index"] == expected);
}

TEST_CASE("stream mode alarms on the first exceedance") {
    const Run r = run({"monitor", "--stream", "--n", "50", "--h", "10", "--c", "0"}, zero_series(50, 12, 5.0));
    CHECK(r.code == kExitAlarm);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["index"] == 12);
    const Run q = run({"monitor", "--stream", "--n", "50", "--h", "10", "--c", "1"}, zero_series(30));
    CHECK(q.code == kExitOk);
    CHECK(nlohmann::json::parse(q.out)["observed"] == 30);
    CHECK(run({"monitor", "--stream", "--n", "50", "--h", "10", "--c", "1"}, "t,y\n1,x\n").code == kExitUsage);
    CHECK(run({"monitor", "--stream", "--h", "10", "--c", "1"}, zero_series(3)).code == kExitUsage);
}

TEST_CASE("table1 output") {
    const Run r = run({"table1"});
    REQUIRE(r.code == kExitOk);
    std::istringstream in(r.out);
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "kernel,10,5,4,2,1.5,1.2,1");
    bool found = false;
    while (std::getline(in, row)) {
        if (row.rfind("gaussian,", 0) != 0) continue;
        std::vector<double> v;
        std::stringstream cells(row.substr(9));
        std::string cell;
        while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 7);
        CHECK(std::abs(v[1] - 0.0310) <= 0.0005);
        found = true;
    }
    CHECK(found);
}

TEST_CASE("coverage command") {
    const Run r = run({"coverage", "--zeta", "4", "--n", "250", "--reps", "2000", "--seed", "42"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["coverage"].get<double>() - 0.9473) <= 0.02);
    CHECK(j["N"] == 250);
    CHECK(j["h"].get<double>() == doctest::Approx(62.5));
    CHECK(j["reps"] == 2000);
    CHECK(j.contains("alpha"));
    CHECK(j.contains("kernel"));
    CHECK(j.contains("zeta"));
}

TEST_CASE("optkernel command") {
    const fs::path table = scratch("kstar.csv");
    const Run r = run({"optkernel", "--m0", "ramp", "--c", "0.03", "--output", table.string()});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["s_star"].get<double>() - 0.31622777) < 1e-6);
    std::ifstream f(table);
    std::string header;
    std::getline(f, header);
    CHECK(header == "z,k");
    CHECK(run({"optkernel", "--m0", "zero", "--c", "0.03"}).code == kExitUsage);
}

TEST_CASE("calibrate command") {
    const Run r = run({"calibrate", "--variant", "finite", "--n", "50", "--h", "10", "--c-grid", "0:0.5:3",
                       "--reps", "100", "--seed", "1"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("c,normed_arl\n", 0) == 0);
    CHECK(lines(r.out) == 4);
    const Run jobs = run({"calibrate", "--variant", "finite", "--n", "50", "--h", "10", "--c-grid", "0:0.5:3",
                          "--reps", "100", "--seed", "1", "--jobs", "3"});
    CHECK(jobs.out == r.out);

    const fs::path table = scratch("arl.csv");
    const Run t = run({"calibrate", "--variant", "limit", "--zeta", "3", "--c-grid", "0,0.2,0.4,0.8", "--reps", "200",
                       "--grid-m", "256", "--seed", "2", "--target", "0.5", "--output", table.string()});
    REQUIRE(t.code == kExitOk);
    const auto j = nlohmann::json::parse(t.out);
    CHECK(j["target"] == 0.5);
    CHECK(j["critical_value"].get<double>() > 0.0);
    CHECK(j["critical_value"].get<double>() < 0.8);
    std::ifstream f(table);
    std::string header;
    std::getline(f, header);
    CHECK(header == "c,normed_arl");
    CHECK(run({"calibrate", "--c-grid", "1:0:x"}).code == kExitUsage);
}

TEST_CASE("paths command") {
    const Run r = run({"paths", "--zeta", "2", "--grid-m", "64", "--count", "3", "--seed", "4"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("s,path_1,path_2,path_3\n", 0) == 0);
    CHECK(lines(r.out) == 65);
    CHECK(run({"paths", "--zeta", "2", "--grid-m", "64", "--count", "3", "--seed", "4"}).out == r.out);
}

TEST_CASE("config file, environment seed and entropy seed") {
    const fs::path cfg = scratch("run.cfg");
    write_file(cfg, "# defaults\nn = 40\nseed = 11\n");
    const Run from_cfg = run({"--config", cfg.string(), "generate"});
    REQUIRE(from_cfg.code == kExitOk);
    CHECK(lines(from_cfg.out) == 41);
    CHECK(from_cfg.out == run({"generate", "--n", "40", "--seed", "11"}).out);
    const Run overridden = run({"--config", cfg.string(), "generate", "--n", "15"});
    CHECK(lines(overridden.out) == 16);

    write_file(scratch("bad.cfg"), "nonsense = 1\n");
    CHECK(run({"--config", scratch("bad.cfg").string(), "generate"}).code == kExitUsage);

    ::setenv("DRIFTWATCH_SEED", "11", 1);
    const Run env = run({"generate", "--n", "40"});
    ::unsetenv("DRIFTWATCH_SEED");
    CHECK(env.out == from_cfg.out);

    const Run entropy = run({"generate", "--n", "10"});
    REQUIRE(entropy.code == kExitOk);
    const auto pos = entropy.err.find("seed=");
    REQUIRE(pos != std::string::npos);
    const std::string seed = entropy.err.substr(pos + 5, entropy.err.find('\n', pos) - pos - 5);
    CHECK(run({"generate", "--n", "10", "--seed", seed}).out == entropy.out);
}

TEST_CASE("config reader") {
    write_file(scratch("plain.cfg"), "grid_m = 128  # comment\n\n  kernel=laplace\n");
    const auto m = read_config_file(scratch("plain.cfg").string());
    CHECK(m.at("grid-m") == "128");
    CHECK(m.at("kernel") == "laplace");
    write_file(scratch("broken.cfg"), "no equals sign\n");
    CHECK_THROWS(read_config_file(scratch("broken.cfg").string()));
}
