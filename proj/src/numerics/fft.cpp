#include <cmath>
#include <map>
#include <stdexcept>

#include "rislink/numerics.hpp"

namespace rislink {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

DftPlan::DftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
    if (n == 0) throw std::invalid_argument("DftPlan: size must be positive");

    if (pow2_) {
        bitrev_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev_[i] = r;
        }
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddle_[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
        return;
    }

    // Bluestein: 2nk = n^2 + k^2 - (k-n)^2 turns the DFT into a convolution
    // with a chirp, evaluated with a power-of-two FFT of length >= 2n-1.
    const std::size_t p = next_pow2(2 * n - 1);
    inner_ = std::make_shared<const DftPlan>(p);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small for large k.
        const auto k2 = static_cast<double>((k * k) % (2 * n));
        chirp_[k] = std::polar(1.0, -kPi * k2 / static_cast<double>(n));
    }
    chirp_filter_.assign(p, cd{});
    chirp_filter_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        chirp_filter_[k] = std::conj(chirp_[k]);
        chirp_filter_[p - k] = std::conj(chirp_[k]);
    }
    inner_->forward(chirp_filter_);
    const double scale = std::sqrt(static_cast<double>(p));
    for (auto& c : chirp_filter_) c *= scale;
}

void DftPlan::forward(std::span<cd> data) const { transform(data, false); }

void DftPlan::inverse(std::span<cd> data) const { transform(data, true); }

void DftPlan::transform(std::span<cd> data, bool inverse) const {
    if (data.size() != n_) throw std::invalid_argument("DftPlan: length mismatch");
    if (n_ == 1) return;
    if (pow2_)
        radix2(data, inverse);
    else
        bluestein(data, inverse);
}

void DftPlan::radix2(std::span<cd> x, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i)
        if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);

    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t i = 0; i < n_; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cd w = twiddle_[j * stride];
                if (inverse) w = std::conj(w);
                const cd u = x[i + j];
                const cd v = x[i + j + half] * w;
                x[i + j] = u + v;
                x[i + j + half] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& v : x) v *= scale;
}

void DftPlan::bluestein(std::span<cd> x, bool inverse) const {
    // IDFT(x) = conj(DFT(conj(x))) for the unitary pair.
    if (inverse)
        for (auto& v : x) v = std::conj(v);

    const std::size_t p = inner_->size();
    std::vector<cd> a(p, cd{});
    for (std::size_t k = 0; k < n_; ++k) a[k] = x[k] * chirp_[k];
    inner_->forward(a);
    for (std::size_t k = 0; k < p; ++k) a[k] *= chirp_filter_[k];
    inner_->inverse(a);

    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    for (std::size_t k = 0; k < n_; ++k) x[k] = a[k] * chirp_[k] * scale;

    if (inverse)
        for (auto& v : x) v = std::conj(v);
}

const DftPlan& dft_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<DftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<DftPlan>(n);
    return *slot;
}

ComplexVector dft(const ComplexVector& v, bool inverse) {
    if (v.size() == 0) throw std::invalid_argument("dft: empty input");
    ComplexVector out = v;
    const auto& plan = dft_plan(static_cast<std::size_t>(v.size()));
    std::span<cd> view(out.data(), static_cast<std::size_t>(out.size()));
    if (inverse)
        plan.inverse(view);
    else
        plan.forward(view);
    return out;
}

}  // namespace rislink
