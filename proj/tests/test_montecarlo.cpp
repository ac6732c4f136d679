// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "hrh/montecarlo.hpp"

using Catch::Approx;

namespace {

hrh::Scenario scenario(int M, double gamma2_db, hrh::NoiseModel noise = hrh::NoiseModel::integrator)
{
    hrh::Scenario s;
    s.frame.helper_count = M;
    s.frame.slot_duration = 1e-6;
    s.gamma2 = hrh::db_to_linear(gamma2_db);
    s.noise = noise;
    return s;
}

hrh::RecursionGrid coarse()
{
    hrh::RecursionGrid g;
    g.points_per_unit = 600;
    return g;
}

} // namespace

TEST_CASE("noise-free frames reach full coherence", "[montecarlo]")
{
    for (int M = 1; M <= 8; ++M)
        for (auto fid : {hrh::SlotFidelity::envelope, hrh::SlotFidelity::waveform}) {
            auto s = scenario(M, 0.0, hrh::NoiseModel::none);
            s.fidelity = fid;
            for (std::uint64_t t = 0; t < 5; ++t) {
                const auto r = hrh::run_adjustment_frame(s, {}, 3, t);
                CHECK(r.alpha_final == Approx(M).epsilon(1e-9));
                CHECK(static_cast<int>(r.alpha.size()) == M);
                for (double e : r.phase_error)
                    CHECK(std::abs(e) <= 1e-9);
            }
        }
}

TEST_CASE("noise-free frames with the exact tag reach full coherence", "[montecarlo]")
{
    const hrh::TagParams tag;
    auto s = scenario(4, 0.0, hrh::NoiseModel::none);
    s.fidelity = hrh::SlotFidelity::waveform;
    s.tag_model = hrh::TagModel::exact;
    s.tag = std::make_shared<const hrh::TagTransfer>(tag);
    s.tag_amplitude = 0.3;
    const auto r = hrh::run_adjustment_frame(s, {}, 1, 0);
    CHECK(r.alpha_final == Approx(4.0).epsilon(1e-9));
}

TEST_CASE("trial records are internally consistent", "[montecarlo]")
{
    const auto s = scenario(6, -5.0);
    const auto recs = hrh::run_trials(s, {}, 500, 11);
    for (const auto& r : recs) {
        CHECK(r.zeta == Approx(std::cbrt(2.0 * r.alpha_final)).epsilon(1e-12));
        CHECK(r.alpha.front() == 1.0);
        for (std::size_t i = 0; i < r.alpha.size(); ++i)
            CHECK((r.alpha[i] >= 0.0 && r.alpha[i] <= static_cast<double>(i + 1) + 1e-12));
        CHECK(r.k_factor.size() == 5);
    }
}

TEST_CASE("results do not depend on the worker count", "[montecarlo]")
{
    auto s = scenario(4, 0.0);
    hrh::ImpairmentConfig imp;
    imp.ppm = 1.0;
    imp.delay_error = true;
    const auto a = hrh::run_trials(s, imp, 700, 5, 1);
    const auto b = hrh::run_trials(s, imp, 700, 5, 4);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].alpha == b[k].alpha);
        CHECK(a[k].phase_error == b[k].phase_error);
    }
}

TEST_CASE("phase-law sampling agrees with the analytic recursion", "[montecarlo]")
{
    for (double g_db : {-5.0, 5.0}) {
        const auto d = hrh::estimate_alpha_distribution(scenario(4, g_db, hrh::NoiseModel::phase_law), {}, 20000, 21);
        const hrh::AlphaRecursion rec(4, hrh::db_to_linear(g_db), coarse());
        CHECK(hrh::ks_statistic(d.sorted, [&](double a) { return rec.cdf(4, a); }) <= 0.015);
    }
}

TEST_CASE("integrator noise at high SNR converges to the analytic recursion", "[montecarlo]")
{
    const auto d = hrh::estimate_alpha_distribution(scenario(3, 15.0), {}, 20000, 8);
    // The distribution is only a few thousandths wide here, so it needs the full grid.
    const hrh::AlphaRecursion rec(3, hrh::db_to_linear(15.0), hrh::RecursionGrid{});
    CHECK(hrh::ks_statistic(d.sorted, [&](double a) { return rec.cdf(3, a); }) <= 0.02);
}

TEST_CASE("envelope and waveform slots give the same statistics", "[montecarlo]")
{
    auto env = scenario(3, 0.0);
    auto wav = env;
    wav.fidelity = hrh::SlotFidelity::waveform;
    const auto a = hrh::estimate_alpha_distribution(env, {}, 10000, 17);
    const auto b = hrh::estimate_alpha_distribution(wav, {}, 10000, 17);
    CHECK(hrh::ks_two_sample(a.sorted, b.sorted) <= 0.03);
}

TEST_CASE("impairments reduce coherence without noise", "[montecarlo]")
{
    auto s = scenario(6, 0.0, hrh::NoiseModel::none);
    hrh::ImpairmentConfig delay;
    delay.delay_error = true;
    const auto r = hrh::run_adjustment_frame(s, delay, 1, 0);
    const double th = hrh::delay_phase_error(s.helper_distance, s.frame.slot_duration);
    // Each new helper lands th behind the partial sum it is aligned to.
    double a = 1.0;
    hrh::cplx sum = 1.0;
    for (int i = 1; i < 6; ++i) {
        sum += std::polar(1.0, std::arg(sum) + th);
        a = std::abs(sum);
    }
    CHECK(r.alpha_final == Approx(a).epsilon(1e-9));
    CHECK(r.alpha_final < 6.0);

    hrh::ImpairmentConfig drift;
    drift.ppm = 5.0;
    const auto d = hrh::run_adjustment_frame(s, drift, 1, 0);
    CHECK(d.alpha_final < 6.0);
    CHECK(d.alpha_final > 3.0);
}

TEST_CASE("distribution summaries", "[montecarlo]")
{
    const auto d = hrh::estimate_alpha_distribution(scenario(4, 0.0, hrh::NoiseModel::none), {}, 100, 1);
    CHECK(d.normalized_percentile(0.1) == Approx(1.0));
    CHECK(d.fraction_exceeding_conventional() == 1.0);
    const auto c = hrh::ref_cdf(scenario(4, 0.0), {}, 2000, 2);
    CHECK(c.zeta.back() <= c.coherent + 1e-12);
    CHECK(c(c.coherent) == 1.0);
    CHECK(c.conventional == Approx(1.71).margin(1e-3));
    CHECK_THROWS_AS(hrh::estimate_alpha_distribution(scenario(4, 0.0), {}, 0, 1), std::invalid_argument);
}

TEST_CASE("exact tag keeps the adjustment working deep in the linear region", "[montecarlo]")
{
    const hrh::SystemParams sys;
    const hrh::TagParams tag;
    auto base = scenario(4, 0.0);
    const auto rows = hrh::tag_regime_sweep({0.5, 15.0}, base, sys, tag, {}, 4000, 31);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].amplitude_units > 50.0);
    CHECK(rows[0].p50_exact >= 0.8);
    CHECK(std::abs(rows[1].p50_exact - rows[1].p50_quadratic) <= 0.05);
}

TEST_CASE("scenario validation", "[montecarlo]")
{
    auto s = scenario(3, 0.0);
    s.helper_amplitudes = {1.0, 1.0};
    CHECK_THROWS_AS(hrh::FrameSimulator(s, {}), std::invalid_argument);
    s = scenario(3, 0.0);
    s.tag_model = hrh::TagModel::exact;
    CHECK_THROWS_AS(hrh::FrameSimulator(s, {}), std::invalid_argument);
    hrh::ImpairmentConfig bad;
    bad.ppm = -1.0;
    CHECK_THROWS_AS(hrh::FrameSimulator(scenario(3, 0.0), bad), std::invalid_argument);
}
