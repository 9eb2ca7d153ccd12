#include <cmath>
#include <stdexcept>
#include <string>

#include "rislink/estimation.hpp"

namespace rislink {

int bem_basis_count(double k_over, int n_samples, double max_doppler, double linewidth, double sample_period) {
    if (!(k_over >= 1.0)) throw std::invalid_argument("bem_basis_count: oversampling factor must be >= 1");
    const double spread = 2.0 * k_over * n_samples * (max_doppler + linewidth) * sample_period;
    return static_cast<int>(std::ceil(spread)) + 1;
}

TapGainMatrix bem_estimate(const SnapshotEstimate& snap, double max_doppler, double linewidth, double sample_period,
                           double k_over, int n_samples) {
    const int q_count = bem_basis_count(k_over, n_samples, max_doppler, linewidth, sample_period);
    const int np = snap.pilot_count();
    if (q_count > np)
        throw std::invalid_argument("bem_estimate: " + std::to_string(q_count) + " basis functions exceed " +
                                    std::to_string(np) + " pilots");

    // Basis q has normalized frequency (q - (Q-1)/2) / (k_over * n_samples).
    const double centre = (q_count - 1) / 2.0;
    const double period = k_over * n_samples;
    auto basis = [&](double n, int q) { return std::polar(1.0, 2.0 * kPi * (q - centre) * n / period); };

    ComplexMatrix full(n_samples, q_count);
    for (int n = 0; n < n_samples; ++n)
        for (int q = 0; q < q_count; ++q) full(n, q) = basis(n, q);

    TapGainMatrix g;
    g.gains = ComplexMatrix::Zero(n_samples, snap.tap_count());
    g.includes_phase_noise = true;
    for (int l = 0; l < snap.tap_count(); ++l) {
        if (!snap.active[static_cast<std::size_t>(l)]) continue;
        ComplexMatrix at_pilots(np, q_count);
        for (int p = 0; p < np; ++p)
            for (int q = 0; q < q_count; ++q) at_pilots(p, q) = basis(snap.sample_time(l, p), q);
        const ComplexVector obs = snap.taps.row(l).transpose();
        const ComplexVector coeff = at_pilots.colPivHouseholderQr().solve(obs);
        g.gains.col(l) = full * coeff;
    }
    return g;
}

namespace {

// Natural cubic spline through (x[i], y[i]), x strictly increasing; evaluated
// at integer points 0..n-1 with constant extension outside the knots.
ComplexVector natural_spline(const std::vector<double>& x, const ComplexVector& y, int n) {
    const std::size_t k = x.size();
    std::vector<double> h(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) h[i] = x[i + 1] - x[i];

    // Second derivatives at the interior knots from the tridiagonal system
    // h[i-1] M[i-1] + 2(h[i-1]+h[i]) M[i] + h[i] M[i+1] = 6 (slope[i] - slope[i-1]).
    std::vector<cd> second(k, cd{});
    const std::size_t interior = k - 2;
    std::vector<double> diag(interior), upper(interior);
    std::vector<cd> rhs(interior);
    for (std::size_t j = 0; j < interior; ++j) {
        const std::size_t i = j + 1;
        diag[j] = 2.0 * (h[i - 1] + h[i]);
        upper[j] = h[i];
        rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    // Thomas algorithm; the sub-diagonal entry of row j is h[j].
    for (std::size_t j = 1; j < interior; ++j) {
        const double w = h[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    for (std::size_t j = interior; j-- > 0;) {
        cd v = rhs[j];
        if (j + 1 < interior) v -= upper[j] * second[j + 2];
        second[j + 1] = v / diag[j];
    }

    ComplexVector out(n);
    std::size_t seg = 0;
    for (int t = 0; t < n; ++t) {
        const double xt = t;
        if (xt <= x.front()) {
            out[t] = y[0];
            continue;
        }
        if (xt >= x.back()) {
            out[t] = y[static_cast<Eigen::Index>(k - 1)];
            continue;
        }
        while (x[seg + 1] < xt) ++seg;
        const double a = (x[seg + 1] - xt) / h[seg];
        const double b = (xt - x[seg]) / h[seg];
        out[t] = a * y[seg] + b * y[seg + 1] +
                 ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * (h[seg] * h[seg]) / 6.0;
    }
    return out;
}

}  // namespace

TapGainMatrix spline_estimate(const SnapshotEstimate& snap, int n_samples) {
    const int np = snap.pilot_count();
    if (np < 4) throw std::invalid_argument("spline_estimate: needs at least 4 pilots");

    TapGainMatrix g;
    g.gains = ComplexMatrix::Zero(n_samples, snap.tap_count());
    g.includes_phase_noise = true;
    for (int l = 0; l < snap.tap_count(); ++l) {
        if (!snap.active[static_cast<std::size_t>(l)]) continue;
        std::vector<double> knots(static_cast<std::size_t>(np));
        for (int p = 0; p < np; ++p) knots[p] = snap.sample_time(l, p);
        g.gains.col(l) = natural_spline(knots, snap.taps.row(l).transpose(), n_samples);
    }
    return g;
}

}  // namespace rislink
