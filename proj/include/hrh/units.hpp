// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace hrh {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Maps any angle into (-pi, pi].
inline double wrap_phase(double x)
{
    const double pi = std::numbers::pi;
    if (x > -pi && x <= pi)
        return x;
    double r = std::remainder(x, two_pi);
    if (r <= -pi)
        r += two_pi;
    return r;
}

} // namespace hrh
