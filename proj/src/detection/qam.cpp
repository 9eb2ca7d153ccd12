#include <cmath>
#include <limits>
#include <stdexcept>

#include "rislink/detection.hpp"

namespace rislink {

QamConstellation::QamConstellation(int order) : order_(order) {
    if (order == 4) {
        bits_ = 2;
        const double s = 1.0 / std::sqrt(2.0);
        for (int label = 0; label < 4; ++label) {
            const int b0 = (label >> 1) & 1;
            const int b1 = label & 1;
            points_.emplace_back(s * (1 - 2 * b0), s * (1 - 2 * b1));
        }
    } else if (order == 16) {
        bits_ = 4;
        const double s = 1.0 / std::sqrt(10.0);
        for (int label = 0; label < 16; ++label) {
            const int b0 = (label >> 3) & 1;
            const int b1 = (label >> 2) & 1;
            const int b2 = (label >> 1) & 1;
            const int b3 = label & 1;
            const double i = (1 - 2 * b0) * (2 - (1 - 2 * b2));
            const double q = (1 - 2 * b1) * (2 - (1 - 2 * b3));
            points_.emplace_back(s * i, s * q);
        }
    } else {
        throw std::invalid_argument("QamConstellation: order must be 4 or 16");
    }
}

std::vector<cd> QamConstellation::map(std::span<const std::uint8_t> bits) const {
    if (bits.size() % static_cast<std::size_t>(bits_) != 0)
        throw std::invalid_argument("qam_map: bit count not a multiple of bits per symbol");
    std::vector<cd> out(bits.size() / bits_);
    for (std::size_t k = 0; k < out.size(); ++k) {
        int label = 0;
        for (int b = 0; b < bits_; ++b) label = (label << 1) | (bits[k * bits_ + b] & 1);
        out[k] = points_[static_cast<std::size_t>(label)];
    }
    return out;
}

cd QamConstellation::nearest(cd y) const {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = std::norm(y - points_[i]);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return points_[best];
}

std::vector<std::uint8_t> QamConstellation::demap_hard(std::span<const cd> symbols) const {
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() * bits_);
    for (const cd& y : symbols) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double d = std::norm(y - points_[i]);
            if (d < dist) {
                dist = d;
                best = i;
            }
        }
        for (int b = bits_ - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((best >> b) & 1));
    }
    return out;
}

std::vector<double> QamConstellation::demap_soft(std::span<const cd> symbols, double noise_variance) const {
    if (!(noise_variance > 0.0)) throw std::invalid_argument("qam_demap: soft demapping needs noise variance > 0");
    std::vector<double> out;
    out.reserve(symbols.size() * bits_);
    std::vector<double> d(points_.size());
    for (const cd& y : symbols) {
        for (std::size_t i = 0; i < points_.size(); ++i) d[i] = std::norm(y - points_[i]);
        for (int b = bits_ - 1; b >= 0; --b) {
            double d0 = std::numeric_limits<double>::infinity();
            double d1 = d0;
            for (std::size_t i = 0; i < points_.size(); ++i) {
                if ((i >> b) & 1)
                    d1 = std::min(d1, d[i]);
                else
                    d0 = std::min(d0, d[i]);
            }
            out.push_back((d1 - d0) / noise_variance);
        }
    }
    return out;
}

double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.size() != rx.size()) throw std::invalid_argument("ber: length mismatch");
    if (tx.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] & 1) != (rx[i] & 1);
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

}  // namespace rislink
