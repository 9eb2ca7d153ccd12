#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rislink/types.hpp"

namespace rislink {

// ---------------------------------------------------------------------------
// Unitary DFT
// ---------------------------------------------------------------------------

// Precomputed N-point unitary DFT. Power-of-two sizes run an iterative
// radix-2 transform; any other size goes through Bluestein's chirp-z
// algorithm on top of a power-of-two plan.
class DftPlan {
public:
    explicit DftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    // In-place transform with 1/sqrt(N) scaling in both directions.
    void forward(std::span<cd> data) const;
    void inverse(std::span<cd> data) const;

private:
    void transform(std::span<cd> data, bool inverse) const;
    void radix2(std::span<cd> data, bool inverse) const;
    void bluestein(std::span<cd> data, bool inverse) const;

    std::size_t n_;
    bool pow2_;
    std::vector<std::size_t> bitrev_;
    std::vector<cd> twiddle_;  // e^{-j 2 pi k / n}, k < n/2

    // Bluestein state (non-power-of-two sizes only).
    std::vector<cd> chirp_;         // e^{-j pi k^2 / n}
    std::vector<cd> chirp_filter_;  // FFT of the conjugate chirp, padded
    std::shared_ptr<const DftPlan> inner_;
};

// Per-thread cache of plans keyed by size. Plans are immutable once built.
const DftPlan& dft_plan(std::size_t n);

// Unitary N-point (I)DFT of v. Throws std::invalid_argument on empty input.
ComplexVector dft(const ComplexVector& v, bool inverse = false);

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Bessel function of the first kind, order zero. Absolute error below 1e-10
// on [0, 1e3]. Throws std::invalid_argument for NaN.
double bessel_j0(double x);

// ---------------------------------------------------------------------------
// Kronecker-structured transforms
// ---------------------------------------------------------------------------

// Applies (F_N (x) I_M), or its Hermitian when `inverse`, to a frame of M*N
// samples stored block after block (sample m of block n at index m + n*M).
// Only N-point DFTs across blocks are performed; the Kronecker product is
// never formed.
ComplexVector doppler_block_transform(const ComplexVector& frame, int M, int N, bool inverse);

// Delay-Doppler phase-noise coefficients phi_n[m], returned as an M x N
// matrix (row = delay m, column = Doppler offset n). Each block Psi_n of the
// block-circulant delay-Doppler phase-noise matrix is diag(column n).
ComplexMatrix dd_phase_coefficients(std::span<const double> theta, int M, int N);

// Test-scale dense Phi_DD assembled block by block from
// dd_phase_coefficients. Limited to M*N <= 4096.
ComplexMatrix dense_dd_phase_matrix(std::span<const double> theta, int M, int N);

// Dense unitary DFT matrix with (l,k) entry e^{-j 2 pi l k / n}/sqrt(n).
ComplexMatrix dft_matrix(int n);

// Dense Kronecker product; oracle use only.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace rislink
