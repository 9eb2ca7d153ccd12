#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "rislink/estimation.hpp"

namespace rislink {

namespace {

constexpr std::array<char, 8> kMagic{'R', 'L', 'W', 'I', 'E', 'N', 'E', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw std::runtime_error("load_wiener: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

void put_matrix(std::ostream& out, const ComplexMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put(out, m(r, c).real());
            put(out, m(r, c).imag());
        }
}

ComplexMatrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            m(r, c) = cd{re, im};
        }
    return m;
}

}  // namespace

void save_wiener(const WienerFilterBank& bank, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put(out, kVersion);
    put(out, static_cast<std::uint32_t>(bank.W.rows()));
    put(out, static_cast<std::uint32_t>(bank.W.cols()));
    put(out, bank.model.max_doppler);
    put(out, bank.model.sample_period);
    put(out, static_cast<double>(static_cast<int>(bank.model.oscillator.kind)));
    put(out, bank.model.oscillator.linewidth);
    put(out, bank.model.oscillator.loop_coefficient);
    put(out, bank.noise_variance);
    put(out, bank.pilot_power);
    for (int p : bank.pilot_indices) put(out, static_cast<std::int64_t>(p));
    put_matrix(out, bank.W);
    put_matrix(out, bank.pseudo_inverse);
    if (!out) throw std::runtime_error("save_wiener: write failed");
}

WienerFilterBank load_wiener(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw std::runtime_error("load_wiener: not a Wiener filter bank file");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw std::runtime_error("load_wiener: unsupported version " + std::to_string(version));

    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    WienerFilterBank bank;
    bank.model.max_doppler = get<double>(in);
    bank.model.sample_period = get<double>(in);
    const auto kind = static_cast<int>(get<double>(in));
    if (kind < 0 || kind > 2) throw std::runtime_error("load_wiener: bad oscillator kind");
    bank.model.oscillator.kind = static_cast<OscillatorKind>(kind);
    bank.model.oscillator.linewidth = get<double>(in);
    bank.model.oscillator.loop_coefficient = get<double>(in);
    bank.model.oscillator.sample_period = bank.model.sample_period;
    bank.noise_variance = get<double>(in);
    bank.pilot_power = get<double>(in);
    bank.pilot_indices.resize(cols);
    for (auto& p : bank.pilot_indices) p = static_cast<int>(get<std::int64_t>(in));
    bank.W = get_matrix(in, rows, cols);
    bank.pseudo_inverse = get_matrix(in, cols, cols);
    return bank;
}

void save_wiener(const WienerFilterBank& bank, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_wiener: cannot open " + path);
    save_wiener(bank, out);
}

WienerFilterBank load_wiener(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_wiener: cannot open " + path);
    return load_wiener(in);
}

}  // namespace rislink
