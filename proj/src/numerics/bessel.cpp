#include <cmath>
#include <stdexcept>

#include "rislink/numerics.hpp"

namespace rislink {

namespace {

// Below this argument the Maclaurin series (in extended precision) is used;
// above it the Hankel asymptotic expansion, whose smallest term is ~e^{-2x}.
constexpr double kSeriesLimit = 17.0;

double j0_series(double x) {
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-21L) break;
    }
    return static_cast<double>(sum);
}

double j0_asymptotic(double x) {
    // term_k = a_k(0) / x^k with a_k(0) = prod_{i<=k} (-(2i-1)^2) / (k! 8^k).
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(odd * odd) / (8.0 * k * x);
        if (std::fabs(term) > std::fabs(prev)) break;  // past the optimal truncation point
        // P collects (-1)^(k/2) a_k for even k, Q collects (-1)^((k-1)/2) a_k for odd k.
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            p += sign * term;
        else
            q += sign * term;
        if (std::fabs(term) < 1e-17) break;
        prev = term;
    }
    const double c = std::cos(x);
    const double s = std::sin(x);
    // cos(x - pi/4) and sin(x - pi/4) without rounding pi/4 into a large x.
    const double cos_chi = (c + s) / std::sqrt(2.0);
    const double sin_chi = (s - c) / std::sqrt(2.0);
    return std::sqrt(2.0 / (kPi * x)) * (p * cos_chi - q * sin_chi);
}

}  // namespace

double bessel_j0(double x) {
    if (std::isnan(x)) throw std::invalid_argument("bessel_j0: NaN argument");
    x = std::fabs(x);
    if (std::isinf(x)) return 0.0;
    return x < kSeriesLimit ? j0_series(x) : j0_asymptotic(x);
}

}  // namespace rislink
