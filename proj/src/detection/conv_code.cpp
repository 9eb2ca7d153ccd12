#include <bit>
#include <limits>
#include <stdexcept>

#include "rislink/detection.hpp"

namespace rislink {

void CodecConfig::validate() const {
    if (constraint_length < 2 || constraint_length > 16)
        throw std::invalid_argument("CodecConfig: constraint length must be in [2, 16]");
    const unsigned top = 1u << (constraint_length - 1);
    for (unsigned g : generators)
        if (!(g & top) || g >= (top << 1))
            throw std::invalid_argument("CodecConfig: generator degree must equal constraint_length - 1");
}

namespace {

inline int parity(unsigned v) { return std::popcount(v) & 1; }

}  // namespace

std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> bits, const CodecConfig& codec) {
    codec.validate();
    const int k = codec.constraint_length;
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(codec.coded_length(static_cast<int>(bits.size()))));
    unsigned state = 0;  // previous k-1 inputs, most recent in the top bit
    auto push = [&](unsigned bit) {
        const unsigned reg = (bit << (k - 1)) | state;
        out.push_back(static_cast<std::uint8_t>(parity(reg & codec.generators[0])));
        out.push_back(static_cast<std::uint8_t>(parity(reg & codec.generators[1])));
        state = reg >> 1;
    };
    for (auto b : bits) push(b & 1u);
    for (int i = 0; i < codec.tail_bits(); ++i) push(0);
    return out;
}

std::vector<std::uint8_t> viterbi_decode(std::span<const double> llrs, const CodecConfig& codec) {
    codec.validate();
    if (llrs.size() % 2 != 0 || llrs.size() < static_cast<std::size_t>(2 * codec.tail_bits()))
        throw std::invalid_argument("viterbi_decode: input length must be 2 * (info + constraint_length - 1)");

    const int k = codec.constraint_length;
    const std::size_t steps = llrs.size() / 2;
    const unsigned states = 1u << (k - 1);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    // Branch outputs for every (state, input) pair.
    std::vector<std::uint8_t> out0(2 * states), out1(2 * states);
    for (unsigned s = 0; s < states; ++s)
        for (unsigned b = 0; b < 2; ++b) {
            const unsigned reg = (b << (k - 1)) | s;
            out0[2 * s + b] = static_cast<std::uint8_t>(parity(reg & codec.generators[0]));
            out1[2 * s + b] = static_cast<std::uint8_t>(parity(reg & codec.generators[1]));
        }

    std::vector<double> metric(states, kNegInf), next(states);
    metric[0] = 0.0;
    // decision[t * states + s] = low bit of the predecessor of s at step t.
    std::vector<std::uint8_t> decision(steps * states);

    for (std::size_t t = 0; t < steps; ++t) {
        const double l0 = llrs[2 * t];
        const double l1 = llrs[2 * t + 1];
        for (unsigned ns = 0; ns < states; ++ns) {
            const unsigned b = ns >> (k - 2);
            const unsigned base = (ns << 1) & (states - 1);
            double best = kNegInf;
            std::uint8_t pick = 0;
            for (unsigned x = 0; x < 2; ++x) {
                const unsigned ps = base | x;
                if (metric[ps] == kNegInf) continue;
                const unsigned idx = 2 * ps + b;
                const double m = metric[ps] + (out0[idx] ? -l0 : l0) + (out1[idx] ? -l1 : l1);
                if (m > best) {
                    best = m;
                    pick = static_cast<std::uint8_t>(x);
                }
            }
            next[ns] = best;
            decision[t * states + ns] = pick;
        }
        metric.swap(next);
    }

    // Zero termination: trace back from state 0.
    std::vector<std::uint8_t> bits(steps);
    unsigned s = 0;
    for (std::size_t t = steps; t-- > 0;) {
        bits[t] = static_cast<std::uint8_t>(s >> (k - 2));
        s = ((s << 1) & (states - 1)) | decision[t * states + s];
    }
    bits.resize(steps - static_cast<std::size_t>(codec.tail_bits()));
    return bits;
}

std::vector<std::uint8_t> viterbi_decode_hard(std::span<const std::uint8_t> coded, const CodecConfig& codec) {
    std::vector<double> llrs(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) llrs[i] = (coded[i] & 1) ? -1.0 : 1.0;
    return viterbi_decode(llrs, codec);
}

}  // namespace rislink
