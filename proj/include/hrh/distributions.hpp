// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "special.hpp"
#include "units.hpp"

namespace hrh {

// Density tabulated on a uniform grid together with its CDF.
class GriddedPdf {
public:
    GriddedPdf() = default;

    GriddedPdf(double lo, double hi, std::vector<double> density, std::vector<double> cdf)
        : lo_(lo), hi_(hi), density_(std::move(density)), cdf_(std::move(cdf))
    {
        if (!(hi > lo) || density_.size() < 2 || density_.size() != cdf_.size())
            throw std::invalid_argument("GriddedPdf: need hi > lo and matching grids of >= 2 points");
        step_ = (hi_ - lo_) / static_cast<double>(density_.size() - 1);
    }

    static GriddedPdf from_density(double lo, double hi, std::vector<double> density)
    {
        std::vector<double> cdf(density.size(), 0.0);
        const double h = (hi - lo) / static_cast<double>(density.size() - 1);
        for (std::size_t k = 1; k < density.size(); ++k)
            cdf[k] = cdf[k - 1] + 0.5 * h * (density[k - 1] + density[k]);
        return GriddedPdf(lo, hi, std::move(density), std::move(cdf));
    }

    // Central differences inside, one-sided at the ends, so the trapezoid
    // integral of the density telescopes to cdf.back() - cdf.front().
    static GriddedPdf from_cdf(double lo, double hi, std::vector<double> cdf)
    {
        return GriddedPdf(lo, hi, differentiate(cdf, (hi - lo) / static_cast<double>(cdf.size() - 1)), cdf);
    }

    static std::vector<double> differentiate(const std::vector<double>& cdf, double h)
    {
        const std::size_t n = cdf.size();
        std::vector<double> d(n);
        d[0] = (cdf[1] - cdf[0]) / h;
        d[n - 1] = (cdf[n - 1] - cdf[n - 2]) / h;
        for (std::size_t k = 1; k + 1 < n; ++k)
            d[k] = (cdf[k + 1] - cdf[k - 1]) / (2.0 * h);
        for (double& v : d)
            v = std::max(v, 0.0);
        return d;
    }

    double lower() const { return lo_; }
    double upper() const { return hi_; }
    double step() const { return step_; }
    std::size_t size() const { return density_.size(); }
    double abscissa(std::size_t k) const { return k + 1 == size() ? hi_ : lo_ + step_ * static_cast<double>(k); }
    const std::vector<double>& density() const { return density_; }
    const std::vector<double>& cdf_values() const { return cdf_; }

    double pdf(double x) const { return interpolate(density_, x, 0.0, 0.0); }
    double cdf(double x) const { return interpolate(cdf_, x, 0.0, cdf_.back()); }

    double quantile(double p) const
    {
        p = std::clamp(p, 0.0, 1.0) * cdf_.back();
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
        if (it == cdf_.begin())
            return lo_;
        if (it == cdf_.end())
            return hi_;
        const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
        const double c0 = cdf_[k - 1], c1 = cdf_[k];
        const double f = c1 > c0 ? (p - c0) / (c1 - c0) : 0.0;
        return abscissa(k - 1) + f * step_;
    }

    double integral() const
    {
        double s = 0.0;
        for (std::size_t k = 1; k < density_.size(); ++k)
            s += 0.5 * step_ * (density_[k - 1] + density_[k]);
        return s;
    }

    double mean() const
    {
        double s = 0.0;
        for (std::size_t k = 1; k < density_.size(); ++k)
            s += 0.5 * step_ * (abscissa(k - 1) * density_[k - 1] + abscissa(k) * density_[k]);
        return s;
    }

    void validate(double tolerance = 1e-3) const
    {
        for (std::size_t k = 0; k < size(); ++k) {
            if (!std::isfinite(density_[k]) || density_[k] < 0.0)
                throw std::domain_error("GriddedPdf: density negative or non-finite at index " + std::to_string(k));
            if (k > 0 && cdf_[k] < cdf_[k - 1])
                throw std::domain_error("GriddedPdf: cdf decreases at index " + std::to_string(k));
        }
        if (std::abs(integral() - 1.0) > tolerance)
            throw std::domain_error("GriddedPdf: density integrates to " + std::to_string(integral()));
        if (std::abs(cdf_.back() - 1.0) > tolerance)
            throw std::domain_error("GriddedPdf: cdf ends at " + std::to_string(cdf_.back()));
    }

private:
    double interpolate(const std::vector<double>& v, double x, double below, double above) const
    {
        if (x < lo_)
            return below;
        if (x > hi_)
            return above;
        const double pos = (x - lo_) / step_;
        const std::size_t k = std::min(static_cast<std::size_t>(pos), size() - 2);
        const double f = pos - static_cast<double>(k);
        return v[k] + f * (v[k + 1] - v[k]);
    }

    double lo_ = 0.0, hi_ = 1.0, step_ = 1.0;
    std::vector<double> density_;
    std::vector<double> cdf_;
};

inline double k_factor_from_snrs(double gamma0, double gamma1)
{
    return gamma0 * gamma1 / (gamma0 + gamma1 + 1.0);
}

// K-factor of the estimator statistic when the partial sum is alpha times the
// single-helper amplitude and gamma2 is the single-helper integrator SNR.
inline double k_factor(double alpha, double gamma2)
{
    if (alpha < 0.0 || !(gamma2 > 0.0))
        throw std::invalid_argument("k_factor: need alpha >= 0 and gamma2 > 0");
    const double a2 = alpha * alpha;
    return 4.0 * a2 * a2 * a2 * gamma2 * gamma2 / (a2 * a2 * gamma2 + 4.0 * a2 * gamma2 + 1.0);
}

// The Rician phase law is a good model only while the linear noise terms of
// G0 G1* dominate the noise-by-noise product.
inline bool gaussian_regime(double alpha, double gamma2)
{
    const double a2 = alpha * alpha;
    return a2 * a2 * gamma2 + 4.0 * a2 * gamma2 >= 1.0;
}

// Phase density of a constant phasor in circular Gaussian noise with
// power ratio K.  Written so that no factor overflows for large K.
inline double phase_error_pdf(double phi, double K)
{
    if (K < 0.0)
        throw std::invalid_argument("phase_error_pdf: K must be >= 0");
    const double base = std::exp(-K) / two_pi;
    if (K == 0.0)
        return base;
    const double x = std::cos(phi);
    if (x >= 0.0) {
        const double s = std::sin(phi);
        const double phi_cdf = 0.5 * std::erfc(-std::sqrt(K) * x);
        return base + std::sqrt(K / std::numbers::pi) * x * std::exp(-K * s * s) * phi_cdf;
    }
    return base * erfc_tail_bracket(-std::sqrt(K) * x);
}

inline double alpha_update(double alpha_prev, double phi)
{
    if (alpha_prev < 0.0)
        throw std::invalid_argument("alpha_update: negative amplitude ratio");
    return std::sqrt(std::max(0.0, 1.0 + 2.0 * alpha_prev * std::cos(phi) + alpha_prev * alpha_prev));
}

inline double conditional_alpha_pdf(double alpha, double alpha_prev, double K_prev)
{
    if (!(alpha_prev > 0.0))
        throw std::domain_error("conditional_alpha_pdf: previous amplitude ratio must be positive");
    const double z = (alpha * alpha - alpha_prev * alpha_prev - 1.0) / (2.0 * alpha_prev);
    if (!(std::abs(z) < 1.0) || alpha < 0.0)
        return 0.0;
    return 2.0 * phase_error_pdf(std::acos(z), K_prev) * alpha / (alpha_prev * std::sqrt(1.0 - z * z));
}

// Closed form for the second slot, with z = alpha2^2 - 2.
inline double alpha2_pdf(double alpha2, double K1)
{
    if (!(alpha2 >= 0.0 && alpha2 < 2.0))
        return 0.0;
    const double z = alpha2 * alpha2 - 2.0;
    const double s = std::sqrt(4.0 / (4.0 - alpha2 * alpha2)) / std::numbers::pi;
    if (K1 == 0.0)
        return s;
    if (z >= 0.0) {
        const double q = 0.5 * std::erfc(-std::sqrt(0.25 * K1) * z);
        return s * (std::exp(-K1) + std::sqrt(std::numbers::pi * K1) * z * std::exp(K1 * (0.25 * z * z - 1.0)) * q);
    }
    return s * std::exp(-K1) * erfc_tail_bracket(-std::sqrt(0.25 * K1) * z);
}

// P(|phi| <= psi) for the Rician phase law, tabulated with Simpson cells and
// read back by cubic Hermite interpolation using the density as slope.
class PhaseAbsCdf {
public:
    explicit PhaseAbsCdf(double K, int nodes = 160) : K_(K)
    {
        if (K < 0.0)
            throw std::invalid_argument("PhaseAbsCdf: K must be >= 0");
        if (K == 0.0)
            return;
        const double pi = std::numbers::pi;
        split_ = std::min(pi, 12.0 / std::sqrt(2.0 * K));
        n1_ = nodes;
        n2_ = split_ < pi ? std::max(8, nodes / 4) : 0;
        h1_ = split_ / n1_;
        h2_ = n2_ > 0 ? (pi - split_) / n2_ : 0.0;
        const std::size_t total = static_cast<std::size_t>(n1_ + n2_ + 1);
        psi_.resize(total);
        h_.resize(total);
        f_.resize(total);
        for (std::size_t k = 0; k < total; ++k) {
            const int ki = static_cast<int>(k);
            psi_[k] = ki <= n1_ ? ki * h1_ : split_ + (ki - n1_) * h2_;
            f_[k] = 2.0 * phase_error_pdf(psi_[k], K);
        }
        psi_.back() = pi;
        h_[0] = 0.0;
        for (std::size_t k = 1; k < total; ++k) {
            const double a = psi_[k - 1], b = psi_[k];
            const double mid = 2.0 * phase_error_pdf(0.5 * (a + b), K);
            h_[k] = h_[k - 1] + (b - a) / 6.0 * (f_[k - 1] + 4.0 * mid + f_[k]);
        }
        const double norm = h_.back();
        for (std::size_t k = 0; k < total; ++k) {
            h_[k] /= norm;
            f_[k] /= norm;
        }
        for (std::size_t k = 0; k < total; ++k)
            if (1.0 - h_[k] <= 1e-17) {
                saturation_ = psi_[k];
                break;
            }
    }

    // Smallest tabulated angle beyond which |phi| has no mass left.
    double saturation_angle() const { return saturation_; }

    double operator()(double psi) const
    {
        const double pi = std::numbers::pi;
        if (psi <= 0.0)
            return 0.0;
        if (psi >= pi)
            return 1.0;
        if (K_ == 0.0)
            return psi / pi;
        std::size_t k;
        double step, t;
        if (psi <= split_ || n2_ == 0) {
            step = h1_;
            const double pos = psi / h1_;
            k = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(n1_ - 1));
            t = pos - static_cast<double>(k);
        } else {
            step = h2_;
            const double pos = (psi - split_) / h2_;
            const std::size_t j = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(n2_ - 1));
            k = static_cast<std::size_t>(n1_) + j;
            t = pos - static_cast<double>(j);
        }
        const double t2 = t * t, t3 = t2 * t;
        const double v = (2 * t3 - 3 * t2 + 1) * h_[k] + (t3 - 2 * t2 + t) * step * f_[k] +
                         (-2 * t3 + 3 * t2) * h_[k + 1] + (t3 - t2) * step * f_[k + 1];
        return std::clamp(v, 0.0, 1.0);
    }

    // P(alpha_next <= a | alpha_prev = b).
    double transition_cdf(double a, double b) const
    {
        const double z = (a * a - b * b - 1.0) / (2.0 * b);
        if (z >= 1.0)
            return 1.0;
        if (z <= -1.0)
            return 0.0;
        return 1.0 - (*this)(std::acos(z));
    }

private:
    double K_;
    double saturation_ = std::numbers::pi;
    double split_ = std::numbers::pi, h1_ = 0.0, h2_ = 0.0;
    int n1_ = 0, n2_ = 0;
    std::vector<double> psi_, h_, f_;
};

struct RecursionGrid {
    int points_per_unit = 4000;
    int phase_nodes = 160;
    unsigned workers = 0;
    double singular_band = 0.01;
};

// Marginal distributions of the amplitude ratio for slots 2..max_index.  Each
// step mixes the transition CDF over the previous slot's distribution, with
// the K-factor re-evaluated at every previous amplitude.
class AlphaRecursion {
public:
    AlphaRecursion(int max_index, double gamma2, RecursionGrid grid = {})
        : max_index_(max_index), gamma2_(gamma2), grid_(grid), first_(k_factor(1.0, gamma2), grid.phase_nodes)
    {
        if (max_index < 1)
            throw std::invalid_argument("AlphaRecursion: index must be >= 1");
        if (!(gamma2 > 0.0))
            throw std::invalid_argument("AlphaRecursion: gamma2 must be positive");
        if (grid.points_per_unit < 16)
            throw std::invalid_argument("AlphaRecursion: grid too coarse");
        if (max_index >= 2)
            build_second();
        for (int i = 3; i <= max_index; ++i)
            build_next(i);
    }

    int max_index() const { return max_index_; }
    double gamma2() const { return gamma2_; }

    const GriddedPdf& pdf(int i) const
    {
        if (i < 2 || i > max_index_)
            throw std::out_of_range("AlphaRecursion::pdf: slot index out of range");
        return stages_[static_cast<std::size_t>(i - 2)];
    }

    double cdf(int i, double a) const
    {
        if (i == 1)
            return a >= 1.0 ? 1.0 : 0.0;
        if (i == 2)
            return a <= 0.0 ? 0.0 : first_.transition_cdf(a, 1.0);
        return pdf(i).cdf(a);
    }

    double percentile(int i, double p) const
    {
        if (i == 1)
            return 1.0;
        if (i != 2)
            return pdf(i).quantile(p);
        double lo = 0.0, hi = 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(2, mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    void build_second()
    {
        const int n = grid_.points_per_unit;
        const double h = 1.0 / n;
        const std::size_t count = static_cast<std::size_t>(2 * n + 1);
        std::vector<double> F(count);
        for (std::size_t k = 0; k < count; ++k)
            F[k] = cdf(2, static_cast<double>(k) * h);
        F.back() = 1.0;
        std::vector<double> d = GriddedPdf::differentiate(F, h);
        const double K1 = k_factor(1.0, gamma2_);
        for (std::size_t k = 0; k + 1 < count; ++k) {
            const double a = static_cast<double>(k) * h;
            if (2.0 - a < grid_.singular_band * (1.0 - 1e-9))
                break;
            const double z = (a * a - 2.0) / 2.0;
            d[k] = 2.0 * phase_error_pdf(std::acos(z), K1) * 2.0 / std::sqrt(4.0 - a * a);
        }
        stages_.emplace_back(0.0, 2.0, std::move(d), std::move(F));
    }

    void build_next(int i)
    {
        const int n = grid_.points_per_unit;
        const double h = 1.0 / n;
        const std::vector<double>& prev = stages_.back().cdf_values();
        const std::size_t cells = prev.size() - 1;
        std::vector<double> w(cells), W(cells + 1, 0.0);
        for (std::size_t j = 0; j < cells; ++j) {
            w[j] = std::max(0.0, prev[j + 1] - prev[j]);
            W[j + 1] = W[j] + w[j];
        }

        const std::size_t count = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + 1;
        const std::size_t un = static_cast<std::size_t>(n);
        constexpr std::size_t chunk = 256;
        const std::size_t chunks = (cells + chunk - 1) / chunk;
        std::vector<std::size_t> first(chunks);
        std::vector<std::vector<double>> partial(chunks);

        auto lower_index = [&](std::size_t j) {
            const double m = (static_cast<double>(j) + 0.5);
            return static_cast<std::size_t>(std::floor(std::abs(m - n))) + 1;
        };

        parallel_for(chunks, grid_.workers, [&](std::size_t c) {
            const std::size_t j0 = c * chunk, j1 = std::min(cells, j0 + chunk);
            std::size_t klo = count;
            for (std::size_t j = j0; j < j1; ++j)
                klo = std::min(klo, lower_index(j));
            const std::size_t khi = std::min(count - 1, j1 - 1 + un);
            first[c] = klo;
            std::vector<double> acc(khi >= klo ? khi - klo + 1 : 0, 0.0);
            for (std::size_t j = j0; j < j1; ++j) {
                if (w[j] <= 1e-17)
                    continue;
                const double b = (static_cast<double>(j) + 0.5) * h;
                const PhaseAbsCdf table(k_factor(b, gamma2_), grid_.phase_nodes);
                const double reach = b * b + 1.0 + 2.0 * b * std::cos(table.saturation_angle());
                const auto kcut = static_cast<std::size_t>(std::sqrt(std::max(0.0, reach)) * n);
                const std::size_t ka = std::max(lower_index(j), kcut), kb = std::min(count - 1, j + un);
                for (std::size_t k = ka; k <= kb; ++k)
                    acc[k - klo] += w[j] * table.transition_cdf(static_cast<double>(k) * h, b);
            }
            partial[c] = std::move(acc);
        });

        std::vector<double> F(count, 0.0);
        for (std::size_t k = 0; k < count; ++k)
            F[k] = k >= un ? W[std::min(k - un, cells)] : 0.0;
        for (std::size_t c = 0; c < chunks; ++c)
            for (std::size_t k = 0; k < partial[c].size(); ++k)
                F[first[c] + k] += partial[c][k];
        for (std::size_t k = 1; k < count; ++k)
            F[k] = std::clamp(F[k], F[k - 1], 1.0);
        stages_.push_back(GriddedPdf::from_cdf(0.0, static_cast<double>(i), std::move(F)));
    }

    int max_index_;
    double gamma2_;
    RecursionGrid grid_;
    PhaseAbsCdf first_;
    std::vector<GriddedPdf> stages_;
};

inline GriddedPdf alpha_pdf_recursive(int i, double gamma2, RecursionGrid grid = {})
{
    if (i < 2)
        throw std::invalid_argument("alpha_pdf_recursive: slot index must be >= 2");
    return AlphaRecursion(i, gamma2, grid).pdf(i);
}

inline double ref_coherent(int M) { return std::cbrt(2.0 * M); }
inline double ref_conventional(int M) { return std::cbrt(M + 1.0); }

struct SnrBoosts {
    double coherent_db;
    double incoherent_mean_db;
};

inline SnrBoosts snr_boosts(int M)
{
    return {linear_to_db(4.0 * M * M), linear_to_db(4.0 * M)};
}

// Distribution of the range extension factor cbrt(2 alpha_M).
inline GriddedPdf ref_distribution(const GriddedPdf& alpha)
{
    const std::size_t n = alpha.size();
    const double top = std::cbrt(2.0 * alpha.upper());
    std::vector<double> cdf(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double zeta = k + 1 == n ? top : top * static_cast<double>(k) / static_cast<double>(n - 1);
        cdf[k] = alpha.cdf(0.5 * zeta * zeta * zeta);
    }
    // The density is taken from the mapped CDF; resampling the alpha density
    // loses the integrable spike at the top of the second-slot support.
    std::vector<double> density = GriddedPdf::differentiate(cdf, top / static_cast<double>(n - 1));
    return GriddedPdf(0.0, top, std::move(density), std::move(cdf));
}

inline double ref_percentile(const GriddedPdf& ref, double p) { return ref.quantile(p); }

inline double incoherent_power_cdf(double z, int M, double a_r)
{
    if (z <= 0.0)
        return 0.0;
    const double a2 = a_r * a_r;
    return -std::expm1(-z / (4.0 * M * a2 * a2));
}

struct SlotBounds {
    double ts_min;
    double ts_max;
    bool feasible;
};

// Lower bound from the SNR requirement, upper bound from accumulated drift
// over M-1 slots.  helper_power is eta^2 A_h^4 of the weakest helper.
inline SlotBounds slot_bounds(int M, double max_phase_drift, double max_frequency_error, double gamma2_min,
                              double n0, double helper_power)
{
    if (M < 1 || !(gamma2_min > 0.0) || !(n0 > 0.0) || !(helper_power > 0.0) || !(max_phase_drift > 0.0) ||
        max_frequency_error < 0.0)
        throw std::invalid_argument("slot_bounds: parameters must be positive");
    const double lo = gamma2_min * n0 / helper_power;
    const double hi = (M < 2 || max_frequency_error == 0.0)
                          ? std::numeric_limits<double>::infinity()
                          : max_phase_drift / ((M - 1) * max_frequency_error);
    return {lo, hi, lo <= hi};
}

// Smallest input SNR for which the p-th percentile of alpha_M reaches
// target, searched in dB by bisection on the analytic recursion.
inline double required_gamma2(int M, double p, double target, RecursionGrid grid = {}, double lo_db = -20.0,
                              double hi_db = 40.0, double tol_db = 1e-3)
{
    if (M < 2 || !(target > 0.0) || !(target < M))
        throw std::invalid_argument("required_gamma2: need M >= 2 and 0 < target < M");
    auto reaches = [&](double g_db) { return AlphaRecursion(M, db_to_linear(g_db), grid).percentile(M, p) >= target; };
    if (!reaches(hi_db))
        throw std::domain_error("required_gamma2: target not reached within the search range");
    if (reaches(lo_db))
        return db_to_linear(lo_db);
    while (hi_db - lo_db > tol_db) {
        const double mid = 0.5 * (lo_db + hi_db);
        (reaches(mid) ? hi_db : lo_db) = mid;
    }
    return db_to_linear(hi_db);
}

} // namespace hrh
