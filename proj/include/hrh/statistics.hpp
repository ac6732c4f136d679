// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "distributions.hpp"

namespace hrh {

// Linear interpolation between order statistics (the "type 7" rule).
inline double empirical_percentile(const std::vector<double>& sorted, double p)
{
    if (sorted.empty())
        throw std::invalid_argument("empirical_percentile: no samples");
    p = std::clamp(p, 0.0, 1.0);
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= sorted.size())
        return sorted.back();
    return sorted[k] + (pos - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
template <class Cdf>
double ks_statistic(const std::vector<double>& sorted, const Cdf& cdf)
{
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

inline double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b)
{
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline GriddedPdf histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins)
{
    if (bins < 2 || !(hi > lo))
        throw std::invalid_argument("histogram: need hi > lo and at least 2 bins");
    std::vector<double> counts(bins, 0.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : samples) {
        if (x < lo || x > hi)
            continue;
        const auto k = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
        counts[k] += 1.0;
    }
    // Bin averages placed at bin centres; the grid spans the centres.
    std::vector<double> density(bins);
    const double n = static_cast<double>(samples.size());
    for (std::size_t k = 0; k < bins; ++k)
        density[k] = counts[k] / (n * width);
    return GriddedPdf::from_density(lo + 0.5 * width, hi - 0.5 * width, std::move(density));
}

} // namespace hrh
