#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rislink/types.hpp"

namespace rislink {

// Tapped-delay-line power-delay profile with delays normalized to the RMS
// delay spread.
struct TdlProfile {
    std::vector<double> normalized_delays;
    std::vector<double> powers_db;
};

// 3GPP TDL-C (NLOS) profile, 24 taps.
const TdlProfile& tdl_c();

// Largest integer sample tap the profile produces at this delay spread.
int tdl_max_tap(const TdlProfile& profile, double delay_spread, double sample_period);

struct Path {
    cd gain;
    int delay_tap = 0;
    double doppler = 0.0;  // Hz
};

// Paths of one hop (TX->element or element->RX). `taps` is the hop's channel
// length; every delay_tap is below it.
struct PathSet {
    std::vector<Path> paths;
    int taps = 1;
};

// Draws Rayleigh path gains for every profile tap, delays scaled by
// delay_spread and rounded to whole samples. Expected powers are normalized
// to sum to one. With sinusoids_per_path > 1, every profile tap is split into
// that many equal-power sub-paths (each later gets its own Doppler).
PathSet sample_tdl_paths(const TdlProfile& profile, double delay_spread, double sample_period, Rng& rng,
                         int sinusoids_per_path = 1);

// Jakes Doppler shifts f_D cos(alpha), alpha ~ U[0, 2pi).
std::vector<double> sample_jakes_doppler(int count, double max_doppler, Rng& rng);

// sample_tdl_paths followed by Jakes Doppler assignment.
PathSet sample_link(const TdlProfile& profile, double delay_spread, double sample_period, double max_doppler,
                    Rng& rng, int sinusoids_per_path = 1);

struct RisElement {
    PathSet uplink;    // TX -> element
    PathSet downlink;  // element -> RX
    cd reflection{1.0, 0.0};
};

struct RisChannel {
    std::vector<RisElement> elements;

    int size() const { return static_cast<int>(elements.size()); }
    int uplink_taps() const;
    int downlink_taps() const;
    // Cascade length L = L_u + L_v - 1.
    int cascade_taps() const { return uplink_taps() + downlink_taps() - 1; }
};

// Per-sample, per-tap channel gains g[n, l] (rows = samples, cols = taps).
struct TapGainMatrix {
    ComplexMatrix gains;
    bool includes_phase_noise = false;
    bool includes_ris_phases = true;

    int samples() const { return static_cast<int>(gains.rows()); }
    int taps() const { return static_cast<int>(gains.cols()); }
};

// g[n, l] = (1/sqrt(Q)) sum_i phi_i sum_{l_u + l_v = l} v_i[n, l_v] u_i[n, l_u],
// with both hop responses evaluated at the same sample index n. The 1/sqrt(Q)
// factor gives unit expected power for independent element phases.
TapGainMatrix cascade_ris_channel(const RisChannel& ris, int n_samples, double sample_period);

// r[n] = sum_l g[n, l] s[n - l], s[n < 0] = 0.
SampleVector apply_channel(const SampleVector& s, const TapGainMatrix& g);

// Adjoint of apply_channel: s[m] = sum_l conj(g[m + l, l]) r[m + l].
SampleVector apply_channel_adjoint(const SampleVector& r, const TapGainMatrix& g);

enum class RisStrategy { statistical_align, random, all_ones };

RisStrategy parse_ris_strategy(std::string_view name);
std::string to_string(RisStrategy s);

// statistical_align: phi_i = exp(-j arg h_i[0, l*]) where l* is the tap with
// the largest summed power over elements at n = 0, so that tap combines
// coherently. random: i.i.d. uniform phases. all_ones: phi_i = 1.
RisChannel design_ris_phases(RisChannel ris, RisStrategy strategy, Rng& rng);

// Adds circularly-symmetric complex Gaussian noise of the given variance per
// complex sample.
SampleVector add_awgn(const SampleVector& s, double variance, Rng& rng);

}  // namespace rislink
