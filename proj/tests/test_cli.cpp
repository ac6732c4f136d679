// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using Catch::Approx;

namespace {

struct Result {
    int status;
    std::string out;
};

Result run(const std::string& args)
{
    const std::string cmd = std::string(HRH_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
        out.append(buf.data(), n);
    const int st = ::pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<std::vector<std::string>> rows(const std::string& csv)
{
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("sweep-distance reports the maximum-range received power", "[cli]")
{
    const auto r = run("sweep-distance --distances 4,15");
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("# hrh-csv schema=sweep-distance version=1\n", 0) == 0);
    const auto t = rows(r.out);
    REQUIRE(t.size() == 3);
    CHECK(t[0] == std::vector<std::string>{"d_m", "P_in_dBm", "P_rec_quadratic_dBm", "P_rec_exact_dBm"});
    CHECK(std::stod(t[2][3]) == Approx(-115.5).margin(1.0));
}

TEST_CASE("slot-bounds upper bound decreases with the helper count", "[cli]")
{
    const auto r = run("slot-bounds --ppm 1 --M 2,3,4,5,6,7,8");
    REQUIRE(r.status == 0);
    const auto t = rows(r.out);
    REQUIRE(t.size() == 8);
    CHECK(t[0] == std::vector<std::string>{"M", "Ts_min_s", "Ts_max_s", "feasible"});
    for (std::size_t k = 2; k < t.size(); ++k)
        CHECK(std::stod(t[k][2]) < std::stod(t[k - 1][2]));
    CHECK(std::stod(t[4][2]) == Approx((3.14159265358979 / 8.0) / (4.0 * 6.283185307179586 * 9300.0)).epsilon(1e-9));
}

TEST_CASE("pdf-alpha at high SNR peaks near full coherence", "[cli]")
{
    const auto r = run("pdf-alpha --slot 2 --gamma2-dB 5");
    REQUIRE(r.status == 0);
    const auto t = rows(r.out);
    REQUIRE(t.size() > 100);
    double best = -1.0, at = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double d = std::stod(t[k][1]);
        if (d > best) {
            best = d;
            at = std::stod(t[k][0]);
        }
    }
    CHECK(at > 1.9);
    CHECK(t[1][2] == "2");
}

TEST_CASE("montecarlo output is deterministic and writes a summary", "[cli]")
{
    const auto dir = std::filesystem::temp_directory_path() / "hrh_cli_test";
    std::filesystem::create_directories(dir);
    const auto out = dir / "mc.csv";
    const std::string args = "montecarlo --trials 300 --seed 4 --ppm 1 --delay-error true --trace --out " + out.string();
    REQUIRE(run(args).status == 0);
    const std::string first = slurp(out);
    REQUIRE(run(args + " --workers 1").status == 0);
    CHECK(slurp(out) == first);
    const auto t = rows(first);
    REQUIRE(t.size() == 301);
    CHECK(t[0][0] == "trial");
    CHECK(t[0].size() == 3 + 4 + 3 + 3);
    const auto s = rows(slurp(dir.string() + "/mc.csv.summary.csv"));
    REQUIRE(s.size() == 2);
    CHECK(s[0] == std::vector<std::string>{"M", "gamma2_dB", "Ts_s", "ppm", "p10", "p50", "frac_exceeding_conventional"});
    CHECK(std::stod(s[1][3]) == 1.0);
}

TEST_CASE("config export round-trips through JSON", "[cli]")
{
    const auto dir = std::filesystem::temp_directory_path() / "hrh_cli_test";
    std::filesystem::create_directories(dir);
    const auto json = dir / "cfg.json";
    REQUIRE(run("config --format json --out " + json.string()).status == 0);
    const auto a = run("config");
    const auto b = run("config --config " + json.string());
    REQUIRE(b.status == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("invalid input exits nonzero", "[cli]")
{
    CHECK(run("link-budget --config /nonexistent.ini").status != 0);
    CHECK(run("no-such-command").status != 0);
    CHECK(run("montecarlo --mode analog").status != 0);
    const auto dir = std::filesystem::temp_directory_path() / "hrh_cli_test";
    std::filesystem::create_directories(dir);
    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[base]\npreset = xband-sto2020\n[system]\nbandwidth_hz = -3\n";
    CHECK(run("link-budget --config " + bad.string()).status != 0);
}

TEST_CASE("ref-cdf and percentiles produce their schemas", "[cli]")
{
    const auto r = run("ref-cdf --trials 500 --levels 10");
    REQUIRE(r.status == 0);
    const auto t = rows(r.out);
    REQUIRE(t.size() == 11);
    CHECK(t[0] == std::vector<std::string>{"zeta_pa", "cdf", "zeta_coh", "zeta_conv"});
    CHECK(std::stod(t[10][1]) == 1.0);
    const auto p = run("percentiles --M 2,4 --gamma2-dB 0 --p 0.1,0.5");
    REQUIRE(p.status == 0);
    const auto pt = rows(p.out);
    REQUIRE(pt.size() == 5);
    CHECK(pt[0] == std::vector<std::string>{"M", "gamma2_dB", "p", "G_alpha_norm", "G_ref"});
    CHECK(std::stod(pt[1][3]) == Approx(0.6463).margin(2e-3));
}
