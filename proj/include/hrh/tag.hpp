// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <limits>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "special.hpp"
#include "units.hpp"

namespace hrh {

using cplx = std::complex<double>;

struct TagParams {
    double saturation_current = 5e-6;
    double ideality = 1.05;
    double thermal_voltage = 0.026;
    double fundamental_resistance = 132.0;
    double harmonic_resistance = 146.0;
    double input_efficiency = 1.0;
    double output_efficiency = 1.0;
    double gain_fundamental = db_to_linear(2.2);
    double gain_harmonic = db_to_linear(3.15);

    double rho() const
    {
        return saturation_current * fundamental_resistance / (ideality * thermal_voltage);
    }
    double nvt() const { return ideality * thermal_voltage; }

    void validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("tag.") + name + " must be positive");
        };
        positive(saturation_current, "saturation_current");
        positive(thermal_voltage, "thermal_voltage");
        positive(fundamental_resistance, "fundamental_resistance");
        positive(harmonic_resistance, "harmonic_resistance");
        positive(gain_fundamental, "gain_fundamental");
        positive(gain_harmonic, "gain_harmonic");
        if (!(ideality >= 1.0))
            throw std::invalid_argument("tag.ideality must be >= 1");
        if (!(input_efficiency >= 0.0 && input_efficiency <= 1.0))
            throw std::invalid_argument("tag.input_efficiency must lie in [0, 1]");
        if (!(output_efficiency >= 0.0 && output_efficiency <= 1.0))
            throw std::invalid_argument("tag.output_efficiency must lie in [0, 1]");
    }

    bool operator==(const TagParams&) const = default;
};

// Instantaneous tag current for the real bandpass voltage v, from the
// closed-form solution of u = rho*y + ln(1 + y) with y = i/I_s.
inline double diode_current(double v, const TagParams& tag)
{
    const double rho = tag.rho();
    const double L = std::log(rho) + rho + v / tag.nvt();
    const double w = lambert_w0_exp(L);
    return (w / rho - 1.0) * tag.saturation_current;
}

struct BandpassWaveform {
    std::vector<double> samples;
    double sample_rate = 0.0;       // Hz
    double carrier_frequency = 0.0; // rad/s
    double duration = 0.0;          // s

    double cycles() const { return duration * carrier_frequency / two_pi; }

    void validate() const
    {
        if (!(sample_rate > 0.0) || !(carrier_frequency > 0.0) || !(duration > 0.0))
            throw std::invalid_argument("waveform: rate, carrier and duration must be positive");
        if (sample_rate < 32.0 * carrier_frequency / two_pi * (1.0 - 1e-12))
            throw std::invalid_argument("waveform: fewer than 32 samples per carrier cycle");
        const double c = cycles();
        if (std::abs(c - std::round(c)) > 1e-9 * std::max(1.0, c) || std::round(c) < 1.0)
            throw std::invalid_argument("waveform: duration is not an integer number of carrier cycles");
        const double n = duration * sample_rate;
        if (std::abs(n - static_cast<double>(samples.size())) > 1e-6 * std::max(1.0, n))
            throw std::invalid_argument("waveform: sample count does not match duration * sample_rate");
    }
};

// Re{v e^{j w0 t}} sampled over whole cycles; the sample grid is periodic so
// the final sample sits one step before the end of the last cycle.
inline BandpassWaveform make_tone(cplx envelope, double carrier_frequency, int cycles, int samples_per_cycle)
{
    if (cycles < 1 || samples_per_cycle < 32)
        throw std::invalid_argument("make_tone: need >= 1 cycle and >= 32 samples per cycle");
    BandpassWaveform w;
    const double f = carrier_frequency / two_pi;
    w.carrier_frequency = carrier_frequency;
    w.sample_rate = f * samples_per_cycle;
    w.duration = cycles / f;
    const std::size_t n = static_cast<std::size_t>(cycles) * static_cast<std::size_t>(samples_per_cycle);
    w.samples.resize(n);
    const double a = std::abs(envelope), ph = std::arg(envelope);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = two_pi * static_cast<double>(k % samples_per_cycle) / samples_per_cycle;
        w.samples[k] = a * std::cos(theta + ph);
    }
    return w;
}

// Complex envelope a2 - j b2 of the second harmonic of the tag current.
// Trapezoid rule on a periodic grid reduces to the plain sample sum.
inline cplx second_harmonic_envelope(const BandpassWaveform& waveform, const TagParams& tag)
{
    waveform.validate();
    const double dt = 1.0 / waveform.sample_rate;
    const double w2 = 2.0 * waveform.carrier_frequency;
    double a2 = 0.0, b2 = 0.0;
    for (std::size_t k = 0; k < waveform.samples.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        const double i = diode_current(waveform.samples[k], tag);
        a2 += i * std::cos(w2 * t);
        b2 += i * std::sin(w2 * t);
    }
    const double scale = 2.0 * dt / waveform.duration;
    return {a2 * scale, -b2 * scale};
}

// Exact harmonic response of a tone over one carrier cycle.  Strong drive
// turns the current into narrow pulses, so the sample count grows with it.
inline cplx tone_harmonic(cplx v, const TagParams& tag)
{
    const double u = std::abs(v) / tag.nvt();
    const int samples = u <= 50.0 ? 512 : u <= 1000.0 ? 2048 : 8192;
    return second_harmonic_envelope(make_tone(v, two_pi, 1, samples), tag);
}

enum class BetaMode { series, simplified };

inline double beta_coefficient(const TagParams& tag, BetaMode mode = BetaMode::series)
{
    const double rho = tag.rho();
    const double nvt = tag.nvt();
    if (mode == BetaMode::simplified)
        return rho / (4.0 * nvt);

    const double lnx = std::log(rho) + rho;
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int n = 1; n <= 60; ++n) {
        const double dn = n;
        const double mag = std::exp((dn + 1.0) * std::log(dn) - std::lgamma(dn + 1.0) + dn * lnx);
        sum += (n % 2 == 1 ? mag : -mag);
        if (mag < 1e-15 * std::abs(sum))
            return sum / (4.0 * nvt);
        growing = mag > prev ? growing + 1 : 0;
        if (growing >= 3)
            throw std::domain_error("beta_coefficient: series diverges for this rho");
        prev = mag;
    }
    return sum / (4.0 * nvt);
}

inline cplx quadratic_envelope(cplx v_in, const TagParams& tag, BetaMode mode = BetaMode::series)
{
    return beta_coefficient(tag, mode) * v_in * v_in / tag.fundamental_resistance;
}

inline cplx large_signal_envelope(cplx v_in, const TagParams& tag)
{
    const double a = std::abs(v_in);
    if (a == 0.0)
        return {0.0, 0.0};
    return std::polar(2.0 / (3.0 * std::numbers::pi) * a / tag.fundamental_resistance, 2.0 * std::arg(v_in));
}

// Upper end of the small-signal region in units of n_i V_T.
inline double small_signal_limit(const TagParams& tag)
{
    const double rho = tag.rho();
    return -1.0 - std::log(rho) - rho;
}

// Exact |i2| versus tone amplitude, tabulated once per parameter set.  The
// harmonic magnitude depends only on the amplitude, and its phase is twice
// the input phase, so the table gives the complex response of any tone.
class TagTransfer {
public:
    explicit TagTransfer(const TagParams& tag, int points_per_decade = 150, double lo_units = 1e-4,
                         double hi_units = 1e4)
        : tag_(tag), beta_(beta_coefficient(tag, BetaMode::series))
    {
        tag.validate();
        const double nvt = tag.nvt();
        ln_lo_ = std::log(lo_units * nvt);
        const double ln_hi = std::log(hi_units * nvt);
        const int n = static_cast<int>(std::ceil((ln_hi - ln_lo_) / std::log(10.0) * points_per_decade)) + 1;
        step_ = (ln_hi - ln_lo_) / (n - 1);
        ln_i2_.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double a = std::exp(ln_lo_ + k * step_);
            ln_i2_[static_cast<std::size_t>(k)] = std::log(std::abs(exact(a)));
        }
    }

    cplx exact(cplx v) const { return tone_harmonic(v, tag_); }

    double magnitude(double amplitude) const
    {
        if (amplitude <= 0.0)
            return 0.0;
        const double la = std::log(amplitude);
        const double pos = (la - ln_lo_) / step_;
        if (pos <= 0.0)
            return beta_ * amplitude * amplitude / tag_.fundamental_resistance;
        const std::size_t last = ln_i2_.size() - 1;
        std::size_t k = std::min(static_cast<std::size_t>(pos), last - 1);
        const double f = pos - static_cast<double>(k);
        return std::exp(ln_i2_[k] + f * (ln_i2_[k + 1] - ln_i2_[k]));
    }

    cplx operator()(cplx v) const
    {
        const double a = std::abs(v);
        if (a == 0.0)
            return {0.0, 0.0};
        return std::polar(magnitude(a), 2.0 * std::arg(v));
    }

    const TagParams& params() const { return tag_; }

private:
    TagParams tag_;
    double beta_;
    double ln_lo_ = 0.0;
    double step_ = 1.0;
    std::vector<double> ln_i2_;
};

} // namespace hrh
