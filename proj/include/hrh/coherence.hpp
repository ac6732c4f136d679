// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "rng.hpp"
#include "tag.hpp"
#include "units.hpp"

namespace hrh {

struct FrameConfig {
    int helper_count = 4;
    double slot_duration = 1e-6;
    double ranging_duration = 0.0;

    double frame_duration() const { return (helper_count - 1) * slot_duration + ranging_duration; }
    double sweep_phase(double t) const { return two_pi * t / slot_duration; }

    void validate() const
    {
        if (helper_count < 1)
            throw std::invalid_argument("frame.helper_count must be >= 1");
        if (!(slot_duration > 0.0))
            throw std::invalid_argument("frame.slot_duration must be positive");
        if (!(ranging_duration >= 0.0))
            throw std::invalid_argument("frame.ranging_duration must be >= 0");
    }

    bool operator==(const FrameConfig&) const = default;
};

struct SlotObservation {
    cplx g0, g1, g2;
    double gamma0 = 0.0, gamma1 = 0.0, gamma2 = 0.0;
    double noise_variance = 0.0;

    double k_factor() const { return gamma0 * gamma1 / (gamma0 + gamma1 + 1.0); }
};

class DegenerateObservation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Integrator outputs for one adjustment slot: partial sum A_p e^{j theta_p}
// held fixed while the sweeping helper A_h e^{j theta_bar} rotates through one
// turn.  round_trip is w0*tau of the sweeping helper's downlink.  A null
// stream gives the noise-free values.
inline SlotObservation slot_integrals(cplx partial, cplx helper, double eta, double slot, double n0,
                                      double round_trip, RandomStream* noise = nullptr)
{
    if (!(slot > 0.0) || !(n0 > 0.0))
        throw std::invalid_argument("slot_integrals: slot duration and noise density must be positive");
    const cplx down = std::polar(eta * slot, -2.0 * round_trip);
    SlotObservation o;
    o.g0 = partial * partial * down;
    o.g1 = 2.0 * partial * helper * down;
    o.g2 = helper * helper * down;
    o.noise_variance = slot * n0;
    o.gamma0 = std::norm(o.g0) / o.noise_variance;
    o.gamma1 = std::norm(o.g1) / o.noise_variance;
    o.gamma2 = std::norm(o.g2) / o.noise_variance;
    if (noise) {
        o.g0 += noise->complex_normal(o.noise_variance);
        o.g1 += noise->complex_normal(o.noise_variance);
        o.g2 += noise->complex_normal(o.noise_variance);
    }
    return o;
}

// Same integrals evaluated on a sampled slot.  response maps the tag input
// envelope to the harmonic envelope at the receiver; white noise of density n0
// is added per sample with variance n0/dt.
template <class Response>
SlotObservation slot_integrals_sampled(cplx partial, cplx helper, double slot, double n0, double round_trip,
                                       const Response& response, int samples, RandomStream* noise = nullptr)
{
    if (samples < 64)
        throw std::invalid_argument("slot_integrals_sampled: need at least 64 samples per slot");
    if (!(slot > 0.0) || !(n0 > 0.0))
        throw std::invalid_argument("slot_integrals_sampled: slot duration and noise density must be positive");
    const double dt = slot / samples;
    const cplx down = std::polar(1.0, -2.0 * round_trip);
    cplx c0, c1, c2, e0, e1, e2;
    for (int k = 0; k < samples; ++k) {
        const double phi = two_pi * k / samples;
        const cplx rot = std::polar(1.0, -phi);
        const cplx rot2 = rot * rot;
        const cplx r = response(partial + helper * std::conj(rot)) * down;
        c0 += r;
        c1 += r * rot;
        c2 += r * rot2;
        if (noise) {
            const cplx n = noise->complex_normal(n0 / dt);
            e0 += n;
            e1 += n * rot;
            e2 += n * rot2;
        }
    }
    SlotObservation o;
    o.noise_variance = slot * n0;
    o.g0 = c0 * dt;
    o.g1 = c1 * dt;
    o.g2 = c2 * dt;
    o.gamma0 = std::norm(o.g0) / o.noise_variance;
    o.gamma1 = std::norm(o.g1) / o.noise_variance;
    o.gamma2 = std::norm(o.g2) / o.noise_variance;
    o.g0 += e0 * dt;
    o.g1 += e1 * dt;
    o.g2 += e2 * dt;
    return o;
}

inline double estimate_phase_offset(const SlotObservation& obs)
{
    if (obs.g0 == cplx{} || obs.g1 == cplx{})
        throw DegenerateObservation("estimate_phase_offset: zero integrator output");
    return wrap_phase(std::arg(obs.g0 * std::conj(obs.g1)));
}

inline double apply_adjustment(double theta, double offset, double delay_error = 0.0, double drift = 0.0)
{
    return wrap_phase(theta + offset + delay_error + drift);
}

// Phase error from ignoring the sweep's propagation delay over distance d.
inline double delay_phase_error(double d, double slot) { return two_pi * d / (speed_of_light * slot); }

} // namespace hrh
