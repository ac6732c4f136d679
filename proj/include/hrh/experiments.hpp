// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "distributions.hpp"
#include "link_budget.hpp"
#include "montecarlo.hpp"

namespace hrh {

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
    return v;
}

struct LinkBudgetReport {
    double distance;
    double uplink_gain;
    double p_in_dbm;
    double a_r;
    double a_r_units; // A_r / (n_i V_T)
    double beta;
    double p_rec_quadratic_dbm;
    double p_rec_exact_dbm;
    double noise_psd;       // V^2/Hz at the receiver input
    double noise_excess_dbm; // (N_F - 1) k T B form
    double noise_total_dbm;  // N_F k T B form
    double gamma2_db;        // single-helper integrator SNR at the configured slot
};

inline LinkBudgetReport link_budget_report(const ExperimentConfig& c)
{
    const double d = c.geometry.rn_distance;
    LinkBudgetReport r{};
    r.distance = d;
    r.uplink_gain = uplink_gain(d, c.system, c.tag);
    r.p_in_dbm = watts_to_dbm(tag_input_power(d, c.system, c.tag));
    r.a_r = tag_input_amplitude(d, c.system, c.tag);
    r.a_r_units = r.a_r / c.tag.nvt();
    r.beta = beta_coefficient(c.tag, c.beta_mode);
    r.p_rec_quadratic_dbm =
        watts_to_dbm(received_power_conventional(d, c.system, c.tag, TagModel::quadratic, c.beta_mode));
    r.p_rec_exact_dbm = watts_to_dbm(received_power_conventional(d, c.system, c.tag, TagModel::exact));
    r.noise_psd = noise_psd(c.system);
    SystemParams excess = c.system, total = c.system;
    excess.noise_formula = NoiseFormula::excess;
    total.noise_formula = NoiseFormula::total;
    r.noise_excess_dbm = watts_to_dbm(noise_power(excess));
    r.noise_total_dbm = watts_to_dbm(noise_power(total));
    r.gamma2_db = linear_to_db(c.derived_gamma2());
    return r;
}

inline CsvTable link_budget_table(const LinkBudgetReport& r)
{
    CsvTable t("link-budget", {"quantity", "value", "unit"});
    auto row = [&t](const char* q, double v, const char* u) { t.add({std::string(q), v, std::string(u)}); };
    row("distance", r.distance, "m");
    row("uplink_gain", r.uplink_gain, "1");
    row("P_in", r.p_in_dbm, "dBm");
    row("A_r", r.a_r, "V");
    row("A_r_over_nVT", r.a_r_units, "1");
    row("beta", r.beta, "1/V");
    row("P_rec_quadratic", r.p_rec_quadratic_dbm, "dBm");
    row("P_rec_exact", r.p_rec_exact_dbm, "dBm");
    row("noise_psd", r.noise_psd, "V^2/Hz");
    row("P_noise_excess", r.noise_excess_dbm, "dBm");
    row("P_noise_total", r.noise_total_dbm, "dBm");
    row("gamma2", r.gamma2_db, "dB");
    return t;
}

struct DistancePoint {
    double distance;
    double p_in_dbm;
    double p_rec_quadratic_dbm;
    double p_rec_exact_dbm;
};

inline std::vector<DistancePoint> sweep_distance(const ExperimentConfig& c, const std::vector<double>& distances)
{
    std::vector<DistancePoint> out;
    out.reserve(distances.size());
    for (double d : distances)
        out.push_back({d, watts_to_dbm(tag_input_power(d, c.system, c.tag)),
                       watts_to_dbm(received_power_conventional(d, c.system, c.tag, TagModel::quadratic, c.beta_mode)),
                       watts_to_dbm(received_power_conventional(d, c.system, c.tag, TagModel::exact))});
    return out;
}

inline CsvTable sweep_distance_table(const std::vector<DistancePoint>& points)
{
    CsvTable t("sweep-distance", {"d_m", "P_in_dBm", "P_rec_quadratic_dBm", "P_rec_exact_dBm"});
    for (const auto& p : points)
        t.add({p.distance, p.p_in_dbm, p.p_rec_quadratic_dbm, p.p_rec_exact_dbm});
    return t;
}

// Least-squares slope of log P_rec against log d over [d_lo, d_hi].
inline double loglog_slope(const ExperimentConfig& c, double d_lo, double d_hi, TagModel model,
                           std::size_t n = 64)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double d : log_spaced(d_lo, d_hi, n)) {
        const double x = std::log10(d);
        const double y = std::log10(received_power_conventional(d, c.system, c.tag, model, c.beta_mode));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(n);
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Distance of the sharpest bend in the exact-tag log-log P_rec curve, where
// the quasi-linear slope of -4 turns over towards the quadratic -6.
inline double regime_knee(const ExperimentConfig& c, double d_lo = 0.5, double d_hi = 30.0, std::size_t n = 600)
{
    const auto d = log_spaced(d_lo, d_hi, n);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k)
        y[k] = std::log10(received_power_conventional(d[k], c.system, c.tag, TagModel::exact));
    const double h = std::log10(d_hi / d_lo) / static_cast<double>(n - 1);
    double best = std::numeric_limits<double>::infinity();
    double knee = d_lo;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double curvature = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
        if (curvature < best) {
            best = curvature;
            knee = d[k];
        }
    }
    return knee;
}

inline RecursionGrid grid_for(const ExperimentConfig& c)
{
    RecursionGrid g;
    g.points_per_unit = c.run.grid_points_per_unit;
    g.workers = c.run.workers;
    return g;
}

inline CsvTable pdf_alpha_table(int slot, double gamma2_db, const RecursionGrid& grid, std::size_t stride = 1)
{
    if (slot < 2)
        throw std::invalid_argument("pdf-alpha: slot index must be >= 2");
    const AlphaRecursion rec(slot, db_to_linear(gamma2_db), grid);
    CsvTable t("pdf-alpha", {"alpha", "density", "slot_index", "gamma2_dB"});
    for (int i = 2; i <= slot; ++i) {
        const GriddedPdf& f = rec.pdf(i);
        for (std::size_t k = 0; k < f.size(); k += std::max<std::size_t>(stride, 1))
            t.add({f.abscissa(k), f.density()[k], static_cast<long long>(i), gamma2_db});
    }
    return t;
}

struct PercentileRow {
    int helper_count;
    double gamma2_db;
    double p;
    double alpha_normalized;
    double ref;
};

inline std::vector<PercentileRow> analytic_percentiles(const std::vector<int>& helper_counts,
                                                       const std::vector<double>& gamma2_dbs,
                                                       const std::vector<double>& ps, const RecursionGrid& grid)
{
    std::vector<PercentileRow> rows;
    const int top = helper_counts.empty() ? 1 : *std::max_element(helper_counts.begin(), helper_counts.end());
    for (double g : gamma2_dbs) {
        const AlphaRecursion rec(std::max(top, 1), db_to_linear(g), grid);
        for (int M : helper_counts)
            for (double p : ps) {
                const double a = rec.percentile(M, p);
                rows.push_back({M, g, p, a / M, std::cbrt(2.0 * a)});
            }
    }
    return rows;
}

inline std::vector<PercentileRow> montecarlo_percentiles(const ExperimentConfig& c,
                                                         const std::vector<int>& helper_counts,
                                                         const std::vector<double>& gamma2_dbs,
                                                         const std::vector<double>& ps)
{
    std::vector<PercentileRow> rows;
    for (double g : gamma2_dbs)
        for (int M : helper_counts) {
            ExperimentConfig local = c;
            local.frame.helper_count = M;
            local.geometry.helper_distances.clear();
            local.geometry.lo_phases.clear();
            local.run.gamma2_db = g;
            const auto d = estimate_alpha_distribution(local.scenario(), local.impairments, local.run.trials,
                                                       local.run.seed, local.run.workers);
            for (double p : ps) {
                const double a = empirical_percentile(d.sorted, p);
                rows.push_back({M, g, p, a / M, std::cbrt(2.0 * a)});
            }
        }
    return rows;
}

inline CsvTable percentiles_table(const std::vector<PercentileRow>& rows)
{
    CsvTable t("percentiles", {"M", "gamma2_dB", "p", "G_alpha_norm", "G_ref"});
    for (const auto& r : rows)
        t.add({static_cast<long long>(r.helper_count), r.gamma2_db, r.p, r.alpha_normalized, r.ref});
    return t;
}

struct SlotBoundRow {
    int helper_count;
    double gamma2_min;
    SlotBounds bounds;
};

// Slot window for which the p-quantile of 2 alpha_M beats the conventional
// amplitude M+1 at the configured tag range.
inline std::vector<SlotBoundRow> slot_bound_rows(const ExperimentConfig& c, const std::vector<int>& helper_counts,
                                                 double p, const RecursionGrid& grid)
{
    const double d = c.geometry.rn_distance;
    const double g = harmonic_transimpedance(d, c.system, c.tag) *
                     harmonic_current(c.tag_amplitude(), c.tag, c.run.tag_model, c.beta_mode);
    const double helper_power = g * g;
    const double n0 = noise_psd(c.system);
    const double w_er = c.impairments.frequency_error(c.system.omega());
    std::vector<SlotBoundRow> rows;
    for (int M : helper_counts) {
        const double target = 0.5 * (M + 1);
        const double g2 = required_gamma2(M, p, target, grid);
        rows.push_back({M, g2, slot_bounds(M, c.max_phase_drift, w_er, g2, n0, helper_power)});
    }
    return rows;
}

inline CsvTable slot_bounds_table(const std::vector<SlotBoundRow>& rows)
{
    CsvTable t("slot-bounds", {"M", "Ts_min_s", "Ts_max_s", "feasible"});
    for (const auto& r : rows)
        t.add({static_cast<long long>(r.helper_count), r.bounds.ts_min, r.bounds.ts_max,
               static_cast<long long>(r.bounds.feasible ? 1 : 0)});
    return t;
}

inline CsvTable montecarlo_table(const std::vector<TrialRecord>& records, int helper_count, bool trace)
{
    std::vector<std::string> cols{"trial", "alpha_M", "zeta_pa"};
    if (trace) {
        for (int i = 1; i <= helper_count; ++i)
            cols.push_back("alpha_" + std::to_string(i));
        for (int i = 2; i <= helper_count; ++i)
            cols.push_back("phi_er_" + std::to_string(i));
        for (int i = 2; i <= helper_count; ++i)
            cols.push_back("K_" + std::to_string(i));
    }
    CsvTable t("montecarlo", std::move(cols));
    for (std::size_t n = 0; n < records.size(); ++n) {
        const auto& r = records[n];
        std::vector<CsvCell> row{static_cast<long long>(n), r.alpha_final, r.zeta};
        if (trace) {
            for (double a : r.alpha)
                row.emplace_back(a);
            for (double e : r.phase_error)
                row.emplace_back(e);
            for (double k : r.k_factor)
                row.emplace_back(k);
        }
        t.add(std::move(row));
    }
    return t;
}

struct MonteCarloSummary {
    int helper_count;
    double gamma2_db;
    double slot_duration;
    double ppm;
    double p10; // normalised alpha_M / M
    double p50;
    double frac_exceeding_conventional;
};

inline MonteCarloSummary summarize(const std::vector<TrialRecord>& records, const ExperimentConfig& c)
{
    const int M = c.frame.helper_count;
    std::vector<double> a(records.size());
    std::transform(records.begin(), records.end(), a.begin(), [](const TrialRecord& r) { return r.alpha_final; });
    std::sort(a.begin(), a.end());
    const double conv = ref_conventional(M);
    const auto exceeding = std::count_if(records.begin(), records.end(),
                                         [conv](const TrialRecord& r) { return r.zeta > conv; });
    return {M,
            linear_to_db(c.gamma2()),
            c.frame.slot_duration,
            c.impairments.ppm,
            empirical_percentile(a, 0.1) / M,
            empirical_percentile(a, 0.5) / M,
            static_cast<double>(exceeding) / static_cast<double>(records.size())};
}

inline CsvTable summary_table(const MonteCarloSummary& s)
{
    CsvTable t("montecarlo-summary", {"M", "gamma2_dB", "Ts_s", "ppm", "p10", "p50", "frac_exceeding_conventional"});
    t.add({static_cast<long long>(s.helper_count), s.gamma2_db, s.slot_duration, s.ppm, s.p10, s.p50,
           s.frac_exceeding_conventional});
    return t;
}

// Empirical CDF of the range extension factor at evenly spaced probability
// levels, with the coherent and conventional markers on every row.
inline CsvTable ref_cdf_table(const RefCdf& cdf, std::size_t levels = 1000)
{
    CsvTable t("ref-cdf", {"zeta_pa", "cdf", "zeta_coh", "zeta_conv"});
    const std::size_t n = cdf.zeta.size();
    for (std::size_t k = 1; k <= levels; ++k) {
        const std::size_t idx = std::min(n - 1, (k * n + levels - 1) / levels - 1);
        t.add({cdf.zeta[idx], static_cast<double>(idx + 1) / static_cast<double>(n), cdf.coherent, cdf.conventional});
    }
    return t;
}

inline CsvTable regime_table(const std::vector<RegimeRow>& rows)
{
    CsvTable t("regime-sweep", {"d_m", "A_r_over_nVT", "gamma2_dB", "p10_quadratic", "p50_quadratic", "p10_exact",
                                "p50_exact"});
    for (const auto& r : rows)
        t.add({r.distance, r.amplitude_units, linear_to_db(r.gamma2), r.p10_quadratic, r.p50_quadratic, r.p10_exact,
               r.p50_exact});
    return t;
}

} // namespace hrh
