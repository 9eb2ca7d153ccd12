#include <stdexcept>

#include "rislink/numerics.hpp"

namespace rislink {

ComplexVector doppler_block_transform(const ComplexVector& frame, int M, int N, bool inverse) {
    if (M < 1 || N < 1) throw std::invalid_argument("doppler_block_transform: M and N must be positive");
    if (frame.size() != static_cast<Eigen::Index>(M) * N)
        throw std::invalid_argument("doppler_block_transform: frame length must equal M*N");

    ComplexVector out = frame;
    if (N == 1) return out;

    const auto& plan = dft_plan(static_cast<std::size_t>(N));
    std::vector<cd> column(static_cast<std::size_t>(N));
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) column[n] = out[m + n * M];
        if (inverse)
            plan.inverse(column);
        else
            plan.forward(column);
        for (int n = 0; n < N; ++n) out[m + n * M] = column[n];
    }
    return out;
}

ComplexMatrix dd_phase_coefficients(std::span<const double> theta, int M, int N) {
    if (M < 1 || N < 1) throw std::invalid_argument("dd_phase_coefficients: M and N must be positive");
    if (theta.size() < static_cast<std::size_t>(M) * N)
        throw std::invalid_argument("dd_phase_coefficients: trace shorter than M*N");

    // For a fixed delay m, F_N diag(psi_m) F_N^H is circulant with first column
    // (1/N) sum_i psi[m + iM] e^{-j 2 pi n i / N}, i.e. the unitary DFT of
    // psi_m scaled by 1/sqrt(N).
    ComplexMatrix phi(M, N);
    const auto& plan = dft_plan(static_cast<std::size_t>(N));
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    std::vector<cd> column(static_cast<std::size_t>(N));
    for (int m = 0; m < M; ++m) {
        for (int i = 0; i < N; ++i) column[i] = std::polar(1.0, theta[m + static_cast<std::size_t>(i) * M]);
        plan.forward(column);
        for (int n = 0; n < N; ++n) phi(m, n) = column[n] * scale;
    }
    return phi;
}

ComplexMatrix dense_dd_phase_matrix(std::span<const double> theta, int M, int N) {
    if (static_cast<long>(M) * N > 4096)
        throw std::invalid_argument("dense_dd_phase_matrix: M*N exceeds oracle limit of 4096");
    const ComplexMatrix phi = dd_phase_coefficients(theta, M, N);
    const int size = M * N;
    ComplexMatrix out = ComplexMatrix::Zero(size, size);
    // Block (a, b) is Psi_{(a - b) mod N}.
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const int n = ((a - b) % N + N) % N;
            for (int m = 0; m < M; ++m) out(a * M + m, b * M + m) = phi(m, n);
        }
    return out;
}

ComplexMatrix dft_matrix(int n) {
    ComplexMatrix f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) {
            const auto lk = static_cast<double>((static_cast<long>(l) * k) % n);
            f(l, k) = std::polar(scale, -2.0 * kPi * lk / n);
        }
    return f;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace rislink
