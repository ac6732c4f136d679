// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hrh {

namespace detail {
inline constexpr double inv_e = 0.36787944117144232160;
}

// Principal branch of the Lambert W function, solved with Halley steps on
// g(w) = w - x e^{-w}, which stays finite for arguments near DBL_MAX.
inline double lambert_w0(double x)
{
    if (std::isnan(x) || x < -detail::inv_e)
        throw std::domain_error("lambert_w0: argument below -1/e");
    if (x == 0.0)
        return 0.0;
    if (std::isinf(x))
        return x;

    double w;
    const double q = x + detail::inv_e;
    if (q < 0.05) {
        const double p = std::sqrt(2.0 * std::numbers::e * q);
        if (p == 0.0)
            return -1.0;
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)));
    } else {
        w = std::log1p(x);
    }

    for (int it = 0; it < 50; ++it) {
        const double xe = x * std::exp(-w);
        const double g = w - xe;
        const double g1 = 1.0 + xe;
        const double step = g / (g1 + g * xe / (2.0 * g1));
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w)))
            break;
    }
    return w;
}

// W(e^L) without forming e^L, for the diode solution at large drive levels.
inline double lambert_w0_exp(double L)
{
    if (L < 600.0)
        return lambert_w0(std::exp(L));
    double w = L - std::log(L);
    for (int it = 0; it < 50; ++it) {
        const double step = (w + std::log(w) - L) / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w)
            break;
    }
    return w;
}

// Standard Gaussian tail probability.
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// 1 - sqrt(pi) t e^{t^2} erfc(t) for t >= 0.  Above t = 5 the direct form
// cancels badly, so the erfc continued fraction is evaluated instead.
inline double erfc_tail_bracket(double t)
{
    if (t < 0.0)
        throw std::domain_error("erfc_tail_bracket: negative argument");
    if (t < 5.0) {
        const double erfcx = std::exp(t * t) * std::erfc(t);
        return 1.0 - std::sqrt(std::numbers::pi) * t * erfcx;
    }
    double r = 0.0;
    for (int k = 80; k >= 1; --k)
        r = 0.5 * k / (t + r);
    return r / (t + r);
}

} // namespace hrh
