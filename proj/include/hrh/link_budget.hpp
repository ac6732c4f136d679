// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tag.hpp"
#include "units.hpp"

namespace hrh {

enum class NoiseFormula { excess, total };
enum class TagModel { quadratic, exact };

struct SystemParams {
    double frequency = 9.3e9; // Hz
    double transmit_power = 10.0;
    double gain_tx = db_to_linear(15.0);
    double gain_rx = db_to_linear(15.0);
    double resistance_tx = 50.0;
    double resistance_rx = 50.0;
    double bandwidth = 125e3;
    double noise_figure_db = 2.5;
    double noise_temperature = 290.0;
    NoiseFormula noise_formula = NoiseFormula::excess;

    double omega() const { return two_pi * frequency; }

    void validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("system.") + name + " must be positive");
        };
        positive(frequency, "frequency");
        positive(transmit_power, "transmit_power");
        positive(gain_tx, "gain_tx");
        positive(gain_rx, "gain_rx");
        positive(resistance_tx, "resistance_tx");
        positive(resistance_rx, "resistance_rx");
        positive(bandwidth, "bandwidth");
        positive(noise_temperature, "noise_temperature");
        if (frequency >= 100e9)
            throw std::invalid_argument("system.frequency must be below 100 GHz");
        if (!(noise_figure_db >= 0.0))
            throw std::invalid_argument("system.noise_figure_db must be >= 0");
    }

    bool operator==(const SystemParams&) const = default;
};

struct Geometry {
    double rn_distance = 15.0;
    std::vector<double> helper_distances;
    std::vector<double> lo_phases;

    void validate(int helper_count) const
    {
        if (!(rn_distance > 0.0))
            throw std::invalid_argument("geometry.rn_distance must be positive");
        for (double d : helper_distances)
            if (!(d > 0.0))
                throw std::invalid_argument("geometry.helper_distances must be positive");
        if (!helper_distances.empty() && static_cast<int>(helper_distances.size()) != helper_count)
            throw std::invalid_argument("geometry.helper_distances must list one distance per helper");
        if (!lo_phases.empty() && static_cast<int>(lo_phases.size()) != helper_count)
            throw std::invalid_argument("geometry.lo_phases must list one phase per helper");
    }

    static double delay(double d) { return d / speed_of_light; }
    static double rn_phase(double d, double omega) { return -omega * delay(d); }
    static double helper_phase(double lo_phase, double d, double omega) { return lo_phase - omega * delay(d); }

    bool operator==(const Geometry&) const = default;
};

inline double uplink_gain(double d, const SystemParams& sys, const TagParams& tag)
{
    if (!(d > 0.0))
        throw std::invalid_argument("uplink_gain: distance must be positive");
    return std::sqrt(sys.gain_tx * tag.gain_fundamental) * speed_of_light / (2.0 * sys.omega() * d);
}

inline double downlink_gain(double d, const SystemParams& sys, const TagParams& tag)
{
    if (!(d > 0.0))
        throw std::invalid_argument("downlink_gain: distance must be positive");
    return std::sqrt(sys.gain_rx * tag.gain_harmonic) * speed_of_light / (4.0 * sys.omega() * d);
}

inline double tag_input_power(double d, const SystemParams& sys, const TagParams& tag)
{
    const double h = uplink_gain(d, sys, tag);
    return h * h * sys.transmit_power;
}

inline double tag_input_amplitude(double d, const SystemParams& sys, const TagParams& tag)
{
    return std::sqrt(2.0 * tag.fundamental_resistance * tag.input_efficiency * sys.transmit_power) *
           uplink_gain(d, sys, tag);
}

// Tag-to-receiver voltage gain applied to the harmonic current envelope.
inline double harmonic_transimpedance(double d, const SystemParams& sys, const TagParams& tag)
{
    return downlink_gain(d, sys, tag) *
           std::sqrt(tag.output_efficiency * sys.resistance_rx * tag.harmonic_resistance);
}

inline double link_constant(double d, const SystemParams& sys, const TagParams& tag,
                            BetaMode mode = BetaMode::series)
{
    return harmonic_transimpedance(d, sys, tag) * beta_coefficient(tag, mode) / tag.fundamental_resistance;
}

inline double harmonic_current(double amplitude, const TagParams& tag, TagModel model,
                               BetaMode mode = BetaMode::series)
{
    if (model == TagModel::quadratic)
        return std::abs(quadratic_envelope(amplitude, tag, mode));
    return std::abs(tone_harmonic(amplitude, tag));
}

// P = h_d^2 R_H k_out |I2|^2 / 2 at the tag output reference.
inline double received_power_conventional(double d, const SystemParams& sys, const TagParams& tag,
                                          TagModel model, BetaMode mode = BetaMode::series)
{
    const double i2 = harmonic_current(tag_input_amplitude(d, sys, tag), tag, model, mode);
    const double h = downlink_gain(d, sys, tag);
    return h * h * tag.harmonic_resistance * tag.output_efficiency * i2 * i2 / 2.0;
}

// Envelope-domain noise density in V^2/Hz at the receiver resistance.
inline double noise_psd(const SystemParams& sys)
{
    const double nf = db_to_linear(sys.noise_figure_db);
    const double factor = sys.noise_formula == NoiseFormula::excess ? nf - 1.0 : nf;
    return sys.resistance_rx * boltzmann * sys.noise_temperature * factor;
}

// 2 B_r N0 referred to watts through the receiver resistance.
inline double noise_power(const SystemParams& sys)
{
    return 2.0 * sys.bandwidth * noise_psd(sys) / sys.resistance_rx;
}

struct ReceivedTerms {
    cplx ranging;
    cplx intermodulation;
    cplx helpers;
    cplx noise;

    cplx total() const { return ranging + intermodulation + helpers + noise; }
};

// Three-term harmonic envelope produced by the ranging tone A_r e^{j theta_r}
// and the helper sum A_h e^{j theta_h}, including the downlink phase e^{j2 theta_r}.
inline ReceivedTerms compose_received(double a_r, double theta_r, cplx helper_sum, double eta, cplx noise = {})
{
    if (a_r < 0.0)
        throw std::invalid_argument("compose_received: negative amplitude");
    const cplx down = std::polar(1.0, 2.0 * theta_r);
    const cplx r = std::polar(a_r, theta_r);
    return {eta * r * r * down, 2.0 * eta * r * helper_sum * down, eta * helper_sum * helper_sum * down, noise};
}

// Intermodulation power normalised to the link gain.
inline double intermodulation_power(double a_r, double a_h) { return 4.0 * a_h * a_h * a_r * a_r; }

// SNR at the helper-only integrator for a helper amplitude a_h at the tag.
inline double integrator_snr(double a_h, double d, double slot, const SystemParams& sys, const TagParams& tag,
                             TagModel model, BetaMode mode = BetaMode::series)
{
    const double g = harmonic_transimpedance(d, sys, tag) * harmonic_current(a_h, tag, model, mode) * slot;
    return g * g / (slot * noise_psd(sys));
}

} // namespace hrh
