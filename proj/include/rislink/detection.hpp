#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rislink/channel.hpp"
#include "rislink/waveform.hpp"

namespace rislink {

// ---------------------------------------------------------------------------
// QAM
// ---------------------------------------------------------------------------

// Gray-labelled square QAM with unit average energy. The first bit of each
// symbol selects the sign of the in-phase part, the second the sign of the
// quadrature part; for 16-QAM the third and fourth pick the inner (0) or
// outer (1) amplitude on each axis.
class QamConstellation {
public:
    explicit QamConstellation(int order);

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_; }
    // Point for each label, label = bits read MSB first.
    const std::vector<cd>& points() const { return points_; }

    std::vector<cd> map(std::span<const std::uint8_t> bits) const;
    std::vector<std::uint8_t> demap_hard(std::span<const cd> symbols) const;
    // Max-log LLRs log(P(b=0)/P(b=1)) for noise of the given variance.
    std::vector<double> demap_soft(std::span<const cd> symbols, double noise_variance) const;

    cd nearest(cd y) const;

private:
    int order_;
    int bits_;
    std::vector<cd> points_;
};

// ---------------------------------------------------------------------------
// LSMR
// ---------------------------------------------------------------------------

using LinearOperator = std::function<ComplexVector(const ComplexVector&)>;

struct LsmrOptions {
    int max_iterations = 10;
    double damping = 0.0;
    double tolerance = 1e-8;
    bool verify_adjoint = true;
};

struct LsmrResult {
    ComplexVector x;
    int iterations = 0;
    double residual_norm = 0.0;  // recurrence estimate of ||b - A x||
    bool converged = false;
};

// Minimizes ||b - A x||^2 + damping^2 ||x||^2 by Golub-Kahan
// bidiagonalization (LSMR). `cols` is the dimension of x. Stops after
// max_iterations or once the residual (or the normal-equation residual) falls
// below the tolerance. With verify_adjoint set, a dot test on random vectors
// runs first and std::invalid_argument is thrown if apply_adjoint is not the
// adjoint of apply.
LsmrResult lsmr_solve(const LinearOperator& apply, const LinearOperator& apply_adjoint, const ComplexVector& b,
                      Eigen::Index cols, const LsmrOptions& options);

// ---------------------------------------------------------------------------
// LSMR with hard-decision interference cancellation
// ---------------------------------------------------------------------------

struct EqualizerConfig {
    int ic_iterations = 5;
    int lsmr_iterations = 10;
    double damping = 0.0;

    void validate() const;
};

// Linear map from the data cells of one frame to received delay-time
// samples: place symbols on the grid (pilot and guard cells zero), modulate,
// then apply the time-varying channel.
class FrameOperator {
public:
    FrameOperator(Waveform kind, const FrameConfig& cfg, const PilotPattern& pattern, const TapGainMatrix& channel);

    Eigen::Index data_size() const { return static_cast<Eigen::Index>(data_cells_.size()); }
    Eigen::Index sample_size() const { return channel_.samples(); }
    const std::vector<int>& data_cells() const { return data_cells_; }

    SampleVector apply(const ComplexVector& data) const;
    ComplexVector apply_adjoint(const SampleVector& samples) const;

    // Received contribution of the known pilots.
    SampleVector pilot_response() const;

    // Grid with `data` on the data cells and the pilot re-inserted.
    ComplexMatrix to_grid(const ComplexVector& data) const;

private:
    SampleVector modulate(const ComplexMatrix& symbols, double pilot_amplitude) const;

    Waveform kind_;
    FrameConfig cfg_;
    PilotPattern pattern_;
    TapGainMatrix channel_;
    std::vector<int> data_cells_;
    int grid_cols_;
};

struct EqualizerResult {
    std::vector<int> data_cells;            // linear grid indices
    ComplexVector soft;                     // last-pass linear estimates
    ComplexVector hard;                     // last-pass decisions
    std::vector<ComplexVector> pass_hard;   // decisions after every pass
    ComplexMatrix grid;                     // decisions with pilots re-inserted
    double residual_variance = 0.0;         // mean |soft - hard|^2
};

// Each pass solves the residual system A d = y - A xbar with LSMR, forms
// xbar + d, and slices it to the constellation; the first pass starts from
// xbar = 0. `received` is the raw frame: the pilot contribution is removed
// with the supplied channel before the first pass.
EqualizerResult lsmr_ic_equalize(const SampleVector& received, const TapGainMatrix& channel, Waveform kind,
                                 const FrameConfig& cfg, const PilotPattern& pattern, const EqualizerConfig& eq,
                                 const QamConstellation& constellation);

// ---------------------------------------------------------------------------
// Convolutional code
// ---------------------------------------------------------------------------

// Rate-1/2 feedforward code. Generators are octal-style bit masks whose most
// significant of `constraint_length` bits multiplies the current input.
struct CodecConfig {
    int constraint_length = 7;
    std::array<unsigned, 2> generators{0133, 0171};
    bool soft = true;

    void validate() const;
    int tail_bits() const { return constraint_length - 1; }
    int coded_length(int info_bits) const { return 2 * (info_bits + tail_bits()); }
};

// Zero-terminated encoding; output interleaves the two generator streams.
std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> bits, const CodecConfig& codec);

// Maximum-likelihood decoding with a correlation metric on LLRs (positive
// means bit 0). Input length must be coded_length(info); returns info bits.
std::vector<std::uint8_t> viterbi_decode(std::span<const double> llrs, const CodecConfig& codec);

// Hard-decision decoding (Hamming metric).
std::vector<std::uint8_t> viterbi_decode_hard(std::span<const std::uint8_t> coded, const CodecConfig& codec);

// Fraction of differing bits. Throws on length mismatch.
double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

}  // namespace rislink
