// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hrh/config.hpp"
#include "hrh/csv.hpp"
#include "hrh/experiments.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string without_line(std::string text, const std::string& key)
{
    const auto at = text.find(key);
    REQUIRE(at != std::string::npos);
    const auto end = text.find('\n', at);
    text.erase(at, end - at + 1);
    return text;
}

} // namespace

TEST_CASE("bundled preset carries the X-band system", "[config]")
{
    const auto c = hrh::preset_config("xband-sto2020");
    CHECK(c.system.frequency == 9.3e9);
    CHECK(c.system.transmit_power == 10.0);
    CHECK(c.system.bandwidth == 125e3);
    CHECK(hrh::linear_to_db(c.system.gain_tx) == Approx(15.0));
    CHECK(hrh::linear_to_db(c.system.gain_rx) == Approx(15.0));
    CHECK(c.system.noise_figure_db == 2.5);
    CHECK(c.tag.saturation_current == 5e-6);
    CHECK(c.tag.ideality == 1.05);
    CHECK(c.tag.thermal_voltage == 0.026);
    CHECK(c.tag.rho() == Approx(0.024).margin(5e-4));
    CHECK(c.geometry.rn_distance == 15.0);
    CHECK(c.frame.helper_count == 4);
    CHECK_FALSE(c.run.gamma2_db.has_value());
    CHECK(c.gamma2() == Approx(c.derived_gamma2()));
}

TEST_CASE("preset file on disk matches the embedded copy", "[config]")
{
    CHECK(read_file(HRH_PRESET_DIR "/xband-sto2020.ini") == std::string(hrh::preset_xband_sto2020));
    CHECK(hrh::load_config(HRH_PRESET_DIR "/xband-sto2020.ini") == hrh::preset_config("xband-sto2020"));
}

TEST_CASE("emitted configuration reloads field-exact", "[config]")
{
    auto c = hrh::preset_config("xband-sto2020");
    c.system.gain_tx = 0.1 + 0.2;
    c.tag.fundamental_resistance = 131.04;
    c.geometry.helper_distances = {3.0, 1.0 / 3.0, 7.25, 15.0};
    c.geometry.lo_phases = {0.1, -2.0, 3.0, 1e-17};
    c.impairments.ppm = 1.0 / 7.0;
    c.impairments.delay_error = true;
    c.impairments.draw = hrh::FrequencyDraw::fixed;
    c.run.gamma2_db = -0.4;
    c.run.noise_model = hrh::NoiseModel::phase_law;
    c.run.seed = 18446744073709551615ULL;
    c.beta_mode = hrh::BetaMode::simplified;
    CHECK(hrh::parse_config(hrh::emit_config(c)) == c);
    CHECK(hrh::config_from_json(hrh::config_to_json(c)) == c);
    CHECK(hrh::config_from_json(nlohmann::json::parse(hrh::config_to_json(c).dump())) == c);
}

TEST_CASE("missing and malformed fields are reported by name", "[config]")
{
    const std::string preset = hrh::preset_xband_sto2020;
    CHECK_THROWS_WITH(hrh::parse_config(without_line(preset, "bandwidth_hz")), ContainsSubstring("system.bandwidth_hz"));
    CHECK_THROWS_WITH(hrh::parse_config(without_line(preset, "gain_rx_dbi")), ContainsSubstring("system.gain_rx_dbi"));
    std::string bad = preset;
    bad.replace(bad.find("ideality = 1.05"), 15, "ideality = abc");
    CHECK_THROWS_WITH(hrh::parse_config(bad), ContainsSubstring("tag.ideality"));
    std::string choice = preset;
    choice.replace(choice.find("mode = envelope"), 15, "mode = analog");
    CHECK_THROWS_WITH(hrh::parse_config(choice), ContainsSubstring("run.mode"));
    CHECK_THROWS_WITH(hrh::parse_config("[system]\nfrequency_hz = 1\nthis line is broken\n"), ContainsSubstring("line 3"));
    CHECK_THROWS_AS(hrh::load_config("/nonexistent/file.ini"), hrh::ConfigError);
}

TEST_CASE("cross-field validation", "[config]")
{
    const std::string base = "[base]\npreset = xband-sto2020\n";
    CHECK_THROWS_WITH(hrh::parse_config(base + "[run]\ntag_model = exact\n"), ContainsSubstring("waveform"));
    CHECK_THROWS_WITH(hrh::parse_config(base + "[geometry]\nrn_distance_m = 0\n"), ContainsSubstring("rn_distance"));
    CHECK_THROWS_WITH(hrh::parse_config(base + "[frame]\nhelper_count = 0\n"), ContainsSubstring("helper_count"));
    CHECK_THROWS_WITH(hrh::parse_config(base + "[geometry]\nhelper_distances_m = 1,2\n"), ContainsSubstring("helper_distances"));
    CHECK_NOTHROW(hrh::parse_config(base + "[run]\ntag_model = exact\nmode = waveform\n"));
}

TEST_CASE("base presets and environment overrides", "[config]")
{
    const auto c = hrh::parse_config("[base]\npreset = xband-sto2020\n[frame]\nhelper_count = 6\n[run]\ngamma2_db = 5\n");
    CHECK(c.frame.helper_count == 6);
    CHECK(c.gamma2() == Approx(hrh::db_to_linear(5.0)));
    CHECK(c.system.frequency == 9.3e9);
    CHECK_THROWS_AS(hrh::parse_config("[base]\npreset = nothing\n"), hrh::ConfigError);

    ::setenv("HRH_RUN__TRIALS", "123", 1);
    ::setenv("HRH_IMPAIRMENTS__PPM", "2.5", 1);
    const auto e = hrh::preset_config("xband-sto2020", true);
    CHECK(e.run.trials == 123);
    CHECK(e.impairments.ppm == 2.5);
    CHECK(hrh::preset_config("xband-sto2020", false).run.trials == 10000);
    ::unsetenv("HRH_RUN__TRIALS");
    ::unsetenv("HRH_IMPAIRMENTS__PPM");
}

TEST_CASE("scenario built from a configuration", "[config]")
{
    auto c = hrh::parse_config("[base]\npreset = xband-sto2020\n[geometry]\nhelper_distances_m = 15,30,7.5,15\n"
                               "lo_phases_rad = 0,0,0,0\n");
    const auto s = c.scenario();
    REQUIRE(s.helper_amplitudes.size() == 4);
    CHECK(s.helper_amplitudes[1] == Approx(0.5));
    CHECK(s.helper_amplitudes[2] == Approx(2.0));
    REQUIRE(s.initial_phases.size() == 4);
    CHECK(s.helper_distance == 15.0);
    CHECK(s.gamma2 == Approx(c.derived_gamma2()));
}

TEST_CASE("CSV tables carry a schema line and round-trip precision", "[config]")
{
    hrh::CsvTable t("demo", {"x", "n", "s"});
    t.add({0.1, 7LL, std::string("a")});
    std::ostringstream out;
    t.write(out);
    CHECK(out.str() == "# hrh-csv schema=demo version=1\nx,n,s\n0.10000000000000001,7,a\n");
    CHECK_THROWS_AS(t.add({1.0}), std::invalid_argument);
    CHECK(std::stod(hrh::CsvTable::format(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("link-budget experiment tables", "[config]")
{
    const auto c = hrh::preset_config("xband-sto2020");
    const auto r = hrh::link_budget_report(c);
    CHECK(r.a_r == Approx(0.063656).epsilon(1e-4));
    CHECK(r.p_rec_exact_dbm == Approx(-116.143).margin(0.01));
    CHECK(hrh::loglog_slope(c, 8.0, 15.0, hrh::TagModel::quadratic) == Approx(-6.0).epsilon(1e-9));
    const double knee = hrh::regime_knee(c);
    CHECK((knee > 2.0 && knee < 6.0));
    const auto pts = hrh::sweep_distance(c, {15.0});
    CHECK(pts[0].p_rec_exact_dbm == Approx(r.p_rec_exact_dbm));
}
