#include <stdexcept>

#include "rislink/detection.hpp"

namespace rislink {

void EqualizerConfig::validate() const {
    if (ic_iterations < 1 || lsmr_iterations < 1)
        throw std::invalid_argument("EqualizerConfig: iteration counts must be >= 1");
    if (!(damping >= 0.0)) throw std::invalid_argument("EqualizerConfig: damping must be >= 0");
}

FrameOperator::FrameOperator(Waveform kind, const FrameConfig& cfg, const PilotPattern& pattern,
                             const TapGainMatrix& channel)
    : kind_(kind), cfg_(cfg), pattern_(pattern), channel_(channel) {
    if (channel.samples() != frame_length(kind, cfg))
        throw std::invalid_argument("FrameOperator: channel does not cover the frame");
    if (kind == Waveform::otfs) {
        const auto grid = make_otfs_grid(cfg, pattern);
        data_cells_ = grid.data_cells();
        grid_cols_ = grid.cols;
    } else {
        const auto grid = make_ofdm_grid(cfg);
        data_cells_ = grid.data_cells();
        grid_cols_ = grid.cols;
    }
}

SampleVector FrameOperator::modulate(const ComplexMatrix& symbols, double pilot_amplitude) const {
    if (kind_ == Waveform::otfs) {
        DelayDopplerGrid g(cfg_.M, cfg_.N);
        g.symbols = symbols;
        return otfs_modulate(g, cfg_);
    }
    TimeFrequencyGrid g(cfg_.M, grid_cols_);
    g.symbols = symbols;
    PilotPattern p = pattern_;
    p.amplitude = pilot_amplitude;
    return ofdm_modulate(g, cfg_, p);
}

ComplexMatrix FrameOperator::to_grid(const ComplexVector& data) const {
    ComplexMatrix symbols = ComplexMatrix::Zero(cfg_.M, grid_cols_);
    auto flat = symbols.reshaped();
    for (std::size_t i = 0; i < data_cells_.size(); ++i) flat[data_cells_[i]] = data[static_cast<Eigen::Index>(i)];
    if (kind_ == Waveform::otfs) symbols(0, 0) = std::sqrt(static_cast<double>(cfg_.N)) * pattern_.amplitude;
    return symbols;
}

SampleVector FrameOperator::apply(const ComplexVector& data) const {
    ComplexMatrix symbols = ComplexMatrix::Zero(cfg_.M, grid_cols_);
    auto flat = symbols.reshaped();
    for (std::size_t i = 0; i < data_cells_.size(); ++i) flat[data_cells_[i]] = data[static_cast<Eigen::Index>(i)];
    return apply_channel(modulate(symbols, 0.0), channel_);
}

ComplexVector FrameOperator::apply_adjoint(const SampleVector& samples) const {
    const SampleVector s = apply_channel_adjoint(samples, channel_);
    const ComplexMatrix grid =
        kind_ == Waveform::otfs ? otfs_modulate_adjoint(s, cfg_) : ofdm_modulate_adjoint(s, cfg_);
    const auto flat = grid.reshaped();
    ComplexVector out(data_size());
    for (std::size_t i = 0; i < data_cells_.size(); ++i) out[static_cast<Eigen::Index>(i)] = flat[data_cells_[i]];
    return out;
}

SampleVector FrameOperator::pilot_response() const {
    ComplexMatrix symbols = ComplexMatrix::Zero(cfg_.M, grid_cols_);
    if (kind_ == Waveform::otfs) symbols(0, 0) = std::sqrt(static_cast<double>(cfg_.N)) * pattern_.amplitude;
    return apply_channel(modulate(symbols, pattern_.amplitude), channel_);
}

EqualizerResult lsmr_ic_equalize(const SampleVector& received, const TapGainMatrix& channel, Waveform kind,
                                 const FrameConfig& cfg, const PilotPattern& pattern, const EqualizerConfig& eq,
                                 const QamConstellation& constellation) {
    eq.validate();
    const FrameOperator op(kind, cfg, pattern, channel);
    if (received.size() != op.sample_size()) throw std::invalid_argument("lsmr_ic_equalize: frame length mismatch");

    const SampleVector y = received - op.pilot_response();
    const LinearOperator apply = [&](const ComplexVector& x) { return op.apply(x); };
    const LinearOperator adjoint = [&](const ComplexVector& r) { return op.apply_adjoint(r); };

    EqualizerResult res;
    res.data_cells = op.data_cells();
    ComplexVector decided = ComplexVector::Zero(op.data_size());
    for (int pass = 0; pass < eq.ic_iterations; ++pass) {
        LsmrOptions opts;
        opts.max_iterations = eq.lsmr_iterations;
        opts.damping = eq.damping;
        opts.verify_adjoint = pass == 0;
        const SampleVector residual = pass == 0 ? y : SampleVector(y - op.apply(decided));
        const LsmrResult sol = lsmr_solve(apply, adjoint, residual, op.data_size(), opts);
        res.soft = decided + sol.x;
        for (Eigen::Index i = 0; i < res.soft.size(); ++i) decided[i] = constellation.nearest(res.soft[i]);
        res.pass_hard.push_back(decided);
    }
    res.hard = decided;
    res.residual_variance = res.soft.size() > 0 ? (res.soft - res.hard).squaredNorm() / res.soft.size() : 0.0;
    res.grid = op.to_grid(res.hard);
    return res;
}

}  // namespace rislink
