#pragma once

#include <string>
#include <string_view>

#include "rislink/types.hpp"

namespace rislink {

enum class OscillatorKind { none, fro, cpll };

OscillatorKind parse_oscillator_kind(std::string_view name);
std::string to_string(OscillatorKind k);

// Receiver oscillator. `linewidth` is the one-sided 3 dB linewidth beta_pn
// of the Lorentzian spectrum; `loop_coefficient` is F_PLL (1/s), used by the
// PLL model only.
struct OscillatorModel {
    OscillatorKind kind = OscillatorKind::fro;
    double linewidth = 0.0;         // Hz
    double loop_coefficient = 1e5;  // 1/s
    double sample_period = 1.0;     // s

    // Sample-to-sample phase increment variance 4 pi beta_pn Ts.
    double increment_variance() const;
    void validate() const;
};

// Phase trajectory theta[n] in radians, theta[0] = 0.
struct PhaseNoiseTrace {
    RealVector theta;

    int size() const { return static_cast<int>(theta.size()); }
};

// FRO: Wiener process theta[n] = theta[n-1] + eps[n], eps ~ N(0, 4 pi beta Ts).
// CPLL: exact Ornstein-Uhlenbeck transition a = exp(-F Ts), started in its
// stationary law (variance pi beta / F) and then shifted so theta[0] = 0;
// increments are therefore stationary at every lag.
PhaseNoiseTrace gen_trace(const OscillatorModel& model, int length, Rng& rng);

// Variance of theta[n + lag] - theta[n] (rad^2).
double variogram(const OscillatorModel& model, double lag);

// E[psi[m] psi*[n]] = exp(-variogram(|m - n|) / 2).
double psi_autocorr(const OscillatorModel& model, long m, long n);

// r[n] = exp(j theta[n]) s[n].
SampleVector apply_phase_noise(const SampleVector& s, const PhaseNoiseTrace& trace);

}  // namespace rislink
