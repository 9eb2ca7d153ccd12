#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rislink/channel.hpp"
#include "rislink/phase_noise.hpp"
#include "rislink/waveform.hpp"

namespace rislink {

// Stage-1 output: per-tap channel samples at the pilot instants. Tap l of
// pilot p is observed at frame sample pilot_indices[p] + l, since the pilot
// impulse reaches the receiver through tap l exactly l samples later.
struct SnapshotEstimate {
    ComplexMatrix taps;             // L x N_p
    std::vector<int> pilot_indices; // frame sample indices
    std::vector<bool> active;       // length L; inactive rows are zero

    int tap_count() const { return static_cast<int>(taps.rows()); }
    int pilot_count() const { return static_cast<int>(taps.cols()); }
    int sample_time(int tap, int pilot) const { return pilot_indices[static_cast<std::size_t>(pilot)] + tap; }
};

// Reads r[m_p + l] / A for every pilot and tap. A tap stays active when its
// mean snapshot power exceeds threshold^2 * noise_variance / A^2.
SnapshotEstimate stage1_estimate(const SampleVector& r, const PilotPattern& pattern, int L, double noise_variance,
                                 double threshold = 3.0);

// Second-order statistics of the effective channel g[n] = psi[n] h[n].
struct CorrelationModel {
    double max_doppler = 0.0;  // Hz
    OscillatorModel oscillator;
    double sample_period = 1.0;

    // Jakes: J0(2 pi f_D Ts |lag|).
    double doppler_corr(long lag) const;
    // exp(-variogram(|lag|) / 2).
    double phase_corr(long lag) const;
    // Product of the two; the processes are independent.
    double effective_corr(long lag) const { return doppler_corr(lag) * phase_corr(lag); }

    void validate() const;
};

ComplexMatrix build_K_D(const CorrelationModel& model, const std::vector<int>& rows, const std::vector<int>& cols);
ComplexMatrix build_K_psi(const CorrelationModel& model, const std::vector<int>& rows, const std::vector<int>& cols);

// Precomputed stage-2 interpolator W = K_{g,ghat} (K_{ghat,ghat})^+.
struct WienerFilterBank {
    ComplexMatrix W;                 // n_samples x N_p
    std::vector<int> pilot_indices;  // frame sample indices the columns refer to
    double noise_variance = 0.0;
    double pilot_power = 1.0;
    CorrelationModel model;
    ComplexMatrix pseudo_inverse;    // (K_{ghat,ghat})^+, N_p x N_p

    int samples() const { return static_cast<int>(W.rows()); }
    int pilot_count() const { return static_cast<int>(W.cols()); }

    // Interpolation weights for sample n relative to the pilot instants. Inside
    // [0, samples()) this is a row of W; outside it is evaluated from the model.
    Eigen::RowVectorXcd row(long n) const;
};

// Builds the Wiener interpolator for pilots at `pilot_indices` (sorted frame
// sample indices). K_g is the entrywise product of the phase-noise and
// Doppler correlations; K_{ghat,ghat} = K_g^P + (noise_variance / pilot_power) I,
// pseudo-inverted with eigenvalues below 1e-12 * lambda_max discarded.
WienerFilterBank build_wiener(const CorrelationModel& model, const std::vector<int>& pilot_indices, int n_samples,
                              double noise_variance, double pilot_power);

// Sample-by-sample estimate of every active tap. Tap l uses the weights of
// sample n - l, because its snapshots sit l samples after the pilots and the
// correlation model is stationary.
TapGainMatrix apply_wiener(const WienerFilterBank& bank, const SnapshotEstimate& snap);

// Binary form: "RLWIENER", u32 version, u32 rows, u32 cols, model and noise
// parameters as little-endian IEEE754 doubles, pilot indices as i64, then W and
// the pseudo-inverse as row-major complex128.
void save_wiener(const WienerFilterBank& bank, std::ostream& out);
WienerFilterBank load_wiener(std::istream& in);
void save_wiener(const WienerFilterBank& bank, const std::string& path);
WienerFilterBank load_wiener(const std::string& path);

// Q_BEM = ceil(2 k_over n_samples (f_D + beta_pn) Ts) + 1.
int bem_basis_count(double k_over, int n_samples, double max_doppler, double linewidth, double sample_period);

// Complex-exponential BEM fit of every active tap's snapshots, evaluated on
// all samples. Throws when Q_BEM exceeds the number of pilots.
TapGainMatrix bem_estimate(const SnapshotEstimate& snap, double max_doppler, double linewidth, double sample_period,
                           double k_over, int n_samples);

// Natural cubic spline through every active tap's snapshots, held constant
// beyond the first and last knot. Needs at least four pilots.
TapGainMatrix spline_estimate(const SnapshotEstimate& snap, int n_samples);

// ||estimate - reference||_F^2 / ||reference||_F^2.
double nmse(const TapGainMatrix& estimate, const TapGainMatrix& reference);

}  // namespace rislink
