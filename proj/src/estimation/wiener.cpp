#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "rislink/estimation.hpp"
#include "rislink/numerics.hpp"

namespace rislink {

double CorrelationModel::doppler_corr(long lag) const {
    return bessel_j0(2.0 * kPi * max_doppler * sample_period * static_cast<double>(std::labs(lag)));
}

double CorrelationModel::phase_corr(long lag) const {
    return std::exp(-variogram(oscillator, static_cast<double>(std::labs(lag))) / 2.0);
}

void CorrelationModel::validate() const {
    if (!(max_doppler >= 0.0) || !std::isfinite(max_doppler))
        throw std::invalid_argument("CorrelationModel: max Doppler must be finite and >= 0");
    if (!(sample_period > 0.0)) throw std::invalid_argument("CorrelationModel: sample period must be > 0");
    oscillator.validate();
    if (std::abs(oscillator.sample_period - sample_period) > 1e-12 * sample_period)
        throw std::invalid_argument("CorrelationModel: oscillator sample period differs from the model's");
}

namespace {

template <class Fn>
ComplexMatrix lag_matrix(const std::vector<int>& rows, const std::vector<int>& cols, Fn&& corr) {
    ComplexMatrix k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) k(a, b) = corr(static_cast<long>(rows[a]) - cols[b]);
    return k;
}

}  // namespace

ComplexMatrix build_K_D(const CorrelationModel& model, const std::vector<int>& rows, const std::vector<int>& cols) {
    return lag_matrix(rows, cols, [&](long lag) { return model.doppler_corr(lag); });
}

ComplexMatrix build_K_psi(const CorrelationModel& model, const std::vector<int>& rows, const std::vector<int>& cols) {
    return lag_matrix(rows, cols, [&](long lag) { return model.phase_corr(lag); });
}

Eigen::RowVectorXcd WienerFilterBank::row(long n) const {
    if (n >= 0 && n < W.rows()) return W.row(n);
    Eigen::RowVectorXcd k(static_cast<Eigen::Index>(pilot_indices.size()));
    for (std::size_t p = 0; p < pilot_indices.size(); ++p) k[p] = model.effective_corr(n - pilot_indices[p]);
    return k * pseudo_inverse;
}

WienerFilterBank build_wiener(const CorrelationModel& model, const std::vector<int>& pilot_indices, int n_samples,
                              double noise_variance, double pilot_power) {
    model.validate();
    if (pilot_indices.empty()) throw std::invalid_argument("build_wiener: no pilots");
    if (n_samples < 1) throw std::invalid_argument("build_wiener: n_samples must be >= 1");
    if (!(noise_variance >= 0.0) || !(pilot_power > 0.0))
        throw std::invalid_argument("build_wiener: need noise variance >= 0 and pilot power > 0");
    for (std::size_t p = 1; p < pilot_indices.size(); ++p)
        if (pilot_indices[p] <= pilot_indices[p - 1]) throw std::invalid_argument("build_wiener: pilots not sorted");

    const auto np = static_cast<Eigen::Index>(pilot_indices.size());

    // The model is stationary, so every entry is a function of the lag only.
    const long span = std::max<long>(n_samples, pilot_indices.back() + 1);
    std::vector<double> corr(static_cast<std::size_t>(span) + 1);
    for (long lag = 0; lag <= span; ++lag) corr[static_cast<std::size_t>(lag)] = model.effective_corr(lag);
    auto at = [&](long lag) { return corr[static_cast<std::size_t>(std::labs(lag))]; };

    ComplexMatrix k_pp(np, np);
    for (Eigen::Index a = 0; a < np; ++a)
        for (Eigen::Index b = 0; b < np; ++b) k_pp(a, b) = at(static_cast<long>(pilot_indices[a]) - pilot_indices[b]);
    k_pp.diagonal().array() += noise_variance / pilot_power;

    ComplexMatrix k_gp(n_samples, np);
    for (Eigen::Index n = 0; n < n_samples; ++n)
        for (Eigen::Index p = 0; p < np; ++p) k_gp(n, p) = at(static_cast<long>(n) - pilot_indices[p]);

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(k_pp);
    const auto& lambda = eig.eigenvalues();
    const double cutoff = 1e-12 * lambda.maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(np);
    for (Eigen::Index i = 0; i < np; ++i)
        if (lambda[i] > cutoff) inv[i] = 1.0 / lambda[i];
    const ComplexMatrix& v = eig.eigenvectors();

    WienerFilterBank bank;
    bank.pseudo_inverse = v * inv.asDiagonal() * v.adjoint();
    bank.W = k_gp * bank.pseudo_inverse;
    bank.pilot_indices = pilot_indices;
    bank.noise_variance = noise_variance;
    bank.pilot_power = pilot_power;
    bank.model = model;
    return bank;
}

TapGainMatrix apply_wiener(const WienerFilterBank& bank, const SnapshotEstimate& snap) {
    if (snap.pilot_indices != bank.pilot_indices)
        throw std::invalid_argument("apply_wiener: snapshot pilots differ from the filter bank's");
    const int n = bank.samples();
    const int taps = snap.tap_count();

    TapGainMatrix g;
    g.gains = ComplexMatrix::Zero(n, taps);
    g.includes_phase_noise = true;
    g.includes_ris_phases = true;
    for (int l = 0; l < taps; ++l) {
        if (!snap.active[static_cast<std::size_t>(l)]) continue;
        const ComplexVector obs = snap.taps.row(l).transpose();
        const int shifted = std::min(l, n);
        if (n > shifted) g.gains.col(l).tail(n - shifted) = bank.W.topRows(n - shifted) * obs;
        for (int i = 0; i < shifted; ++i) g.gains(i, l) = (bank.row(static_cast<long>(i) - l) * obs).value();
    }
    return g;
}

}  // namespace rislink
