#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rislink {

using cd = std::complex<double>;

// Column vectors and dense matrices used throughout the library. Matrices
// follow Eigen's default (column-major) storage; serialized forms are always
// written row-major.
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Baseband sample stream of one frame, cyclic prefix and pilot segments
// included.
using SampleVector = ComplexVector;

using Rng = std::mt19937_64;

// Independent, reproducible sub-stream of a frame seed. Distinct stream ids
// never share state, so drawing more samples in one stream leaves the others
// untouched.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return Rng(seq);
}

enum class Waveform { otfs, ofdm };

enum class CellKind : std::uint8_t { data, pilot, guard };

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace rislink
