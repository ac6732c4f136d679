// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <random>

#include "hrh/special.hpp"
#include "hrh/units.hpp"

using Catch::Approx;

namespace {

// w e^w = x by plain bisection in long double.
long double bisect_w(long double x)
{
    long double lo = -1.0L, hi = std::max(1.0L, std::log(1.0L + x) + 1.0L);
    for (int it = 0; it < 400; ++it) {
        const long double mid = 0.5L * (lo + hi);
        (mid * std::exp(mid) < x ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

} // namespace

TEST_CASE("lambert_w0 agrees with a bisection oracle", "[special]")
{
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> exponent(-12.0, 12.0);
    for (int k = 0; k < 500; ++k) {
        const double x = std::pow(10.0, exponent(gen));
        const double w = hrh::lambert_w0(x);
        CHECK(w == Approx(static_cast<double>(bisect_w(x))).epsilon(1e-14));
    }
    for (double x : {-0.36787944117144, -0.3678, -0.3, -0.1, -1e-8}) {
        const double w = hrh::lambert_w0(x);
        CHECK(w * std::exp(w) == Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("lambert_w0 agrees with Boost.Math", "[special]")
{
    for (double x : {-0.36, -0.2, 1e-300, 1e-6, 0.5, 1.0, 3.0, 1e3, 1e100, 1e300}) {
        CHECK(hrh::lambert_w0(x) == Approx(boost::math::lambert_w0(x)).epsilon(1e-14));
    }
    CHECK(hrh::lambert_w0(0.0) == 0.0);
    CHECK(hrh::lambert_w0(-hrh::detail::inv_e) == Approx(-1.0).margin(1e-7));
    CHECK_THROWS_AS(hrh::lambert_w0(-0.5), std::domain_error);
}

TEST_CASE("lambert_w0_exp continues past the overflow of exp", "[special]")
{
    for (double L : {-5.0, 0.0, 10.0, 599.0, 600.0, 700.0, 1e4, 1e8}) {
        const double w = hrh::lambert_w0_exp(L);
        CHECK(w + std::log(w) == Approx(L).epsilon(1e-14).margin(1e-13));
    }
    CHECK(hrh::lambert_w0_exp(599.999) == Approx(hrh::lambert_w0_exp(600.001)).epsilon(1e-5));
}

TEST_CASE("gaussian_q matches the Boost complementary error function", "[special]")
{
    for (double x : {-8.0, -2.0, -0.5, 0.0, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        const double ref = 0.5 * boost::math::erfc(x / std::sqrt(2.0));
        CHECK(hrh::gaussian_q(x) == Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("erfc_tail_bracket matches a long double evaluation", "[special]")
{
    for (double t : {0.0, 0.1, 1.0, 2.5, 4.9, 5.1, 7.0, 10.0, 20.0, 100.0, 1e4}) {
        long double ref;
        if (t < 25.0) {
            const long double tl = t;
            ref = 1.0L - std::sqrt(3.14159265358979323846264338327950288L) * tl * std::exp(tl * tl) * std::erfc(tl);
        } else {
            // Asymptotic series 1/(2t^2) - 3/(4t^4) + 15/(8t^6) ...
            const long double u = 1.0L / (2.0L * t * t);
            ref = u * (1.0L - 3.0L * u + 15.0L * u * u - 105.0L * u * u * u);
        }
        CHECK(hrh::erfc_tail_bracket(t) == Approx(static_cast<double>(ref)).epsilon(t < 25.0 ? 1e-9 : 1e-12));
    }
}

TEST_CASE("unit conversions round-trip", "[units]")
{
    CHECK(hrh::linear_to_db(hrh::db_to_linear(2.5)) == Approx(2.5));
    CHECK(hrh::watts_to_dbm(1e-3) == Approx(0.0).margin(1e-12));
    CHECK(hrh::dbm_to_watts(-30.0) == Approx(1e-6));
    CHECK(hrh::wrap_phase(3.0 * std::numbers::pi) == Approx(std::numbers::pi));
    CHECK(hrh::wrap_phase(-std::numbers::pi) == Approx(std::numbers::pi));
    CHECK(hrh::wrap_phase(0.25) == 0.25);
}
