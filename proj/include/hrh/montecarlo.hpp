// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "coherence.hpp"
#include "distributions.hpp"
#include "link_budget.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "statistics.hpp"

namespace hrh {

// How the phase-estimate error of a slot is produced.  integrator runs the
// estimator on noisy Fourier integrator outputs; phase_law draws the error
// directly from the Rician phase law with the slot's K-factor.
enum class NoiseModel { integrator, phase_law, none };
enum class SlotFidelity { envelope, waveform };
enum class FrequencyDraw { uniform, fixed };

struct ImpairmentConfig {
    double ppm = 0.0;
    bool delay_error = false;
    FrequencyDraw draw = FrequencyDraw::uniform;

    double frequency_error(double omega0) const { return 1e-6 * ppm * omega0; }

    void validate() const
    {
        if (!(ppm >= 0.0))
            throw std::invalid_argument("impairments.ppm must be >= 0");
    }

    bool operator==(const ImpairmentConfig&) const = default;
};

// Everything one adjustment frame needs.  Integrals are computed in units
// where the single-helper tag amplitude and the slot length are 1, so gamma2
// alone fixes the noise level; physical time enters through the drift and
// delay terms.
struct Scenario {
    FrameConfig frame;
    double gamma2 = 1.0;
    double omega0 = two_pi * 9.3e9;
    double helper_distance = 15.0;
    std::vector<double> helper_amplitudes;
    NoiseModel noise = NoiseModel::integrator;
    SlotFidelity fidelity = SlotFidelity::envelope;
    TagModel tag_model = TagModel::quadratic;
    std::shared_ptr<const TagTransfer> tag;
    double tag_amplitude = 0.0; // volts per unit amplitude, exact tag only
    int samples_per_slot = 1024;
    std::vector<double> initial_phases; // tone phases at the tag; empty draws them uniformly per trial

    double amplitude(int m) const
    {
        return helper_amplitudes.empty() ? 1.0 : helper_amplitudes.at(static_cast<std::size_t>(m));
    }

    void validate() const
    {
        frame.validate();
        if (!(frame.slot_duration < 1.0))
            throw std::invalid_argument("scenario: slot duration must be below 1 s");
        if (!(gamma2 > 0.0) && noise != NoiseModel::none)
            throw std::invalid_argument("scenario: gamma2 must be positive");
        if (!helper_amplitudes.empty() && static_cast<int>(helper_amplitudes.size()) != frame.helper_count)
            throw std::invalid_argument("scenario: one amplitude per helper required");
        if (!initial_phases.empty() && static_cast<int>(initial_phases.size()) != frame.helper_count)
            throw std::invalid_argument("scenario: one initial phase per helper required");
        if (tag_model == TagModel::exact && (fidelity != SlotFidelity::waveform || !tag || !(tag_amplitude > 0.0)))
            throw std::invalid_argument("scenario: exact tag model needs waveform fidelity and a tag transfer");
        if (fidelity == SlotFidelity::waveform && samples_per_slot < 1024)
            throw std::invalid_argument("scenario: waveform fidelity needs >= 1024 samples per slot");
    }
};

struct TrialRecord {
    std::vector<double> alpha;       // alpha_1 .. alpha_M at the end of each slot
    std::vector<double> phase_error; // estimate minus true offset, per slot
    std::vector<double> k_factor;    // per slot, from noise-free integrator SNRs
    double alpha_final = 0.0;
    double alpha_after_ranging = 0.0;
    double zeta = 0.0;
    int degenerate_slots = 0;
};

namespace detail {

// Tag response normalised so a unit tone gives a unit harmonic.
struct Response {
    std::shared_ptr<const TagTransfer> tag;
    double amplitude = 0.0;
    double scale = 1.0;
    cplx operator()(cplx v) const
    {
        if (!tag)
            return v * v;
        return (*tag)(v * amplitude) * scale;
    }
};

inline Response make_response(const Scenario& s)
{
    if (s.tag_model == TagModel::quadratic)
        return {};
    return {s.tag, s.tag_amplitude, 1.0 / s.tag->magnitude(s.tag_amplitude)};
}

// Noise density that gives the first slot's helper-only integrator the
// requested SNR.
inline double calibrated_noise_density(const Scenario& s, const Response& r)
{
    if (s.fidelity == SlotFidelity::envelope)
        return 1.0 / s.gamma2;
    const SlotObservation o =
        slot_integrals_sampled(cplx(s.amplitude(0)), cplx(s.amplitude(1)), 1.0, 1.0, 0.0, r, s.samples_per_slot);
    return std::norm(o.g2) / s.gamma2;
}

} // namespace detail

class FrameSimulator {
public:
    FrameSimulator(Scenario scenario, ImpairmentConfig impairments)
        : s_(std::move(scenario)), imp_(impairments)
    {
        s_.validate();
        imp_.validate();
        response_ = detail::make_response(s_);
        n0_ = s_.noise == NoiseModel::none ? 1.0 : detail::calibrated_noise_density(s_, response_);
    }

    const Scenario& scenario() const { return s_; }

    TrialRecord run(std::uint64_t seed, std::uint64_t trial) const
    {
        const int M = s_.frame.helper_count;
        const double Ts = s_.frame.slot_duration;
        const double w_er = imp_.frequency_error(s_.omega0);
        const double theta_d = imp_.delay_error ? delay_phase_error(s_.helper_distance, Ts) : 0.0;
        const double round_trip = s_.omega0 * s_.helper_distance / speed_of_light;

        std::vector<double> phase(static_cast<std::size_t>(M)), freq(static_cast<std::size_t>(M), 0.0);
        if (s_.initial_phases.empty()) {
            RandomStream lo({seed, trial, 0, StreamRole::lo_phase});
            for (auto& p : phase)
                p = wrap_phase(two_pi * lo.uniform());
        } else {
            for (int m = 0; m < M; ++m)
                phase[static_cast<std::size_t>(m)] = wrap_phase(s_.initial_phases[static_cast<std::size_t>(m)]);
        }
        if (w_er > 0.0) {
            RandomStream fr({seed, trial, 0, StreamRole::frequency_error});
            for (int m = 0; m < M; ++m) {
                const double u = fr.uniform();
                freq[static_cast<std::size_t>(m)] =
                    imp_.draw == FrequencyDraw::uniform ? w_er * (2.0 * u - 1.0) : (m % 2 == 0 ? w_er : -w_er);
            }
        }

        auto partial_at = [&](int count, double t) {
            cplx sum;
            for (int m = 0; m < count; ++m)
                sum += std::polar(s_.amplitude(m), phase[static_cast<std::size_t>(m)] +
                                                       freq[static_cast<std::size_t>(m)] * t);
            return sum;
        };

        TrialRecord rec;
        rec.alpha.push_back(s_.amplitude(0));
        for (int i = 1; i < M; ++i) {
            const double t0 = (i - 1) * Ts;
            const cplx partial = partial_at(i, t0);
            const cplx helper = std::polar(s_.amplitude(i), phase[static_cast<std::size_t>(i)] +
                                                                freq[static_cast<std::size_t>(i)] * t0);
            const double truth = wrap_phase(std::arg(partial) - std::arg(helper));
            const auto slot = static_cast<std::uint32_t>(i);

            double estimate = truth;
            double K = 0.0;
            if (s_.noise == NoiseModel::integrator) {
                RandomStream noise({seed, trial, slot, StreamRole::integrator_noise});
                const SlotObservation o = observe(partial, helper, round_trip, &noise);
                K = o.k_factor();
                try {
                    estimate = estimate_phase_offset(o);
                } catch (const DegenerateObservation&) {
                    estimate = 0.0;
                    ++rec.degenerate_slots;
                }
            } else {
                const SlotObservation o = observe(partial, helper, round_trip, nullptr);
                K = o.k_factor();
                if (s_.noise == NoiseModel::phase_law) {
                    RandomStream law({seed, trial, slot, StreamRole::phase_law});
                    const cplx sample = std::sqrt(K) + law.complex_normal(1.0);
                    estimate = wrap_phase(truth + std::arg(sample));
                }
            }
            rec.k_factor.push_back(K);
            rec.phase_error.push_back(wrap_phase(estimate - truth));
            // The correction takes effect from the end of the slot onwards.
            phase[static_cast<std::size_t>(i)] = apply_adjustment(phase[static_cast<std::size_t>(i)], estimate, theta_d);
            rec.alpha.push_back(std::abs(partial_at(i + 1, i * Ts)));
        }
        rec.alpha_final = rec.alpha.back();
        rec.alpha_after_ranging = std::abs(partial_at(M, (M - 1) * Ts + s_.frame.ranging_duration));
        rec.zeta = std::cbrt(2.0 * rec.alpha_final);
        return rec;
    }

private:
    SlotObservation observe(cplx partial, cplx helper, double round_trip, RandomStream* noise) const
    {
        if (s_.fidelity == SlotFidelity::envelope)
            return slot_integrals(partial, helper, 1.0, 1.0, n0_, round_trip, noise);
        return slot_integrals_sampled(partial, helper, 1.0, n0_, round_trip, response_, s_.samples_per_slot, noise);
    }

    Scenario s_;
    ImpairmentConfig imp_;
    detail::Response response_;
    double n0_ = 1.0;
};

inline TrialRecord run_adjustment_frame(const Scenario& scenario, const ImpairmentConfig& impairments,
                                        std::uint64_t seed, std::uint64_t trial = 0)
{
    return FrameSimulator(scenario, impairments).run(seed, trial);
}

struct AlphaDistribution {
    int helper_count = 0;
    std::vector<double> alpha;   // final alpha_M per trial, in trial order
    std::vector<double> sorted;  // ascending copy
    std::vector<double> zeta;    // ascending REF samples

    double normalized_percentile(double p) const { return empirical_percentile(sorted, p) / helper_count; }
    double fraction_above(double threshold) const
    {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
        return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
    }
    // Share of trials whose REF beats M+1 helpers' worth of brute-force power.
    double fraction_exceeding_conventional() const
    {
        const double c = ref_conventional(helper_count);
        const auto it = std::upper_bound(zeta.begin(), zeta.end(), c);
        return static_cast<double>(zeta.end() - it) / static_cast<double>(zeta.size());
    }
    GriddedPdf histogram_pdf(std::size_t bins = 2000) const
    {
        return histogram(alpha, 0.0, static_cast<double>(helper_count), bins);
    }
};

inline std::vector<TrialRecord> run_trials(const Scenario& scenario, const ImpairmentConfig& impairments,
                                           std::size_t trials, std::uint64_t seed, unsigned workers = 0)
{
    const FrameSimulator sim(scenario, impairments);
    std::vector<TrialRecord> out(trials);
    parallel_for(trials, workers, [&](std::size_t t) { out[t] = sim.run(seed, t); });
    return out;
}

inline AlphaDistribution estimate_alpha_distribution(const Scenario& scenario, const ImpairmentConfig& impairments,
                                                     std::size_t trials, std::uint64_t seed, unsigned workers = 0)
{
    if (trials == 0)
        throw std::invalid_argument("estimate_alpha_distribution: need at least one trial");
    const FrameSimulator sim(scenario, impairments);
    AlphaDistribution d;
    d.helper_count = scenario.frame.helper_count;
    d.alpha.resize(trials);
    parallel_for(trials, workers, [&](std::size_t t) { d.alpha[t] = sim.run(seed, t).alpha_final; });
    d.sorted = d.alpha;
    std::sort(d.sorted.begin(), d.sorted.end());
    d.zeta.resize(trials);
    std::transform(d.sorted.begin(), d.sorted.end(), d.zeta.begin(), [](double a) { return std::cbrt(2.0 * a); });
    return d;
}

struct RefCdf {
    std::vector<double> zeta; // ascending
    double coherent = 0.0;
    double conventional = 0.0;

    double operator()(double z) const
    {
        const auto it = std::upper_bound(zeta.begin(), zeta.end(), z);
        return static_cast<double>(it - zeta.begin()) / static_cast<double>(zeta.size());
    }
};

inline RefCdf ref_cdf(const Scenario& scenario, const ImpairmentConfig& impairments, std::size_t trials,
                      std::uint64_t seed, unsigned workers = 0)
{
    const AlphaDistribution d = estimate_alpha_distribution(scenario, impairments, trials, seed, workers);
    return {d.zeta, ref_coherent(scenario.frame.helper_count), ref_conventional(scenario.frame.helper_count)};
}

struct RegimeRow {
    double distance;
    double amplitude_units; // A_r / (n_i V_T)
    double gamma2;
    double p10_quadratic, p50_quadratic;
    double p10_exact, p50_exact;
};

// Percentiles of the normalised amplitude ratio with the quadratic tag and
// with the exact diode tag, both run at the same first-slot SNR.
inline std::vector<RegimeRow> tag_regime_sweep(const std::vector<double>& distances, Scenario base,
                                               const SystemParams& sys, const TagParams& tag,
                                               const ImpairmentConfig& impairments, std::size_t trials,
                                               std::uint64_t seed, unsigned workers = 0)
{
    auto transfer = std::make_shared<const TagTransfer>(tag);
    std::vector<RegimeRow> rows;
    for (double d : distances) {
        const double a = tag_input_amplitude(d, sys, tag);
        RegimeRow row{d, a / tag.nvt(), base.gamma2, 0, 0, 0, 0};
        Scenario q = base;
        q.helper_distance = d;
        q.fidelity = SlotFidelity::waveform;
        q.tag_model = TagModel::quadratic;
        const auto dq = estimate_alpha_distribution(q, impairments, trials, seed, workers);
        Scenario e = q;
        e.tag_model = TagModel::exact;
        e.tag = transfer;
        e.tag_amplitude = a;
        const auto de = estimate_alpha_distribution(e, impairments, trials, seed, workers);
        row.p10_quadratic = dq.normalized_percentile(0.1);
        row.p50_quadratic = dq.normalized_percentile(0.5);
        row.p10_exact = de.normalized_percentile(0.1);
        row.p50_exact = de.normalized_percentile(0.5);
        rows.push_back(row);
    }
    return rows;
}

} // namespace hrh
