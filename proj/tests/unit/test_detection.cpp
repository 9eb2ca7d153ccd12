#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "rislink/detection.hpp"

using namespace rislink;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
    std::bernoulli_distribution b(0.5);
    std::vector<std::uint8_t> out(n);
    for (auto& x : out) x = b(rng) ? 1 : 0;
    return out;
}

ComplexMatrix random_matrix(int r, int c, Rng& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    ComplexMatrix m(r, c);
    for (auto& x : m.reshaped()) x = {d(rng), d(rng)};
    return m;
}

struct Frame {
    FrameConfig cfg;
    PilotPattern pattern;
    ComplexVector data;
    std::vector<std::uint8_t> bits;
    SampleVector tx;
};

Frame make_frame(Waveform kind, const FrameConfig& cfg, const QamConstellation& qam, Rng& rng) {
    Frame f;
    f.cfg = cfg;
    f.pattern = build_pilot_pattern(kind, cfg, default_pilot_power(cfg.L));
    TapGainMatrix unit;
    unit.gains = ComplexMatrix::Zero(frame_length(kind, cfg), cfg.L);
    const FrameOperator op(kind, cfg, f.pattern, unit);
    f.bits = random_bits(static_cast<std::size_t>(op.data_size() * qam.bits_per_symbol()), rng);
    const auto sym = qam.map(f.bits);
    f.data = Eigen::Map<const ComplexVector>(sym.data(), static_cast<Eigen::Index>(sym.size()));
    if (kind == Waveform::otfs) {
        DelayDopplerGrid grid = make_otfs_grid(cfg, f.pattern);
        for (std::size_t i = 0; i < op.data_cells().size(); ++i) grid.symbols.reshaped()[op.data_cells()[i]] = f.data[i];
        f.tx = otfs_modulate(grid, cfg);
    } else {
        TimeFrequencyGrid grid = make_ofdm_grid(cfg);
        for (std::size_t i = 0; i < op.data_cells().size(); ++i) grid.symbols.reshaped()[op.data_cells()[i]] = f.data[i];
        f.tx = ofdm_modulate(grid, cfg, f.pattern);
    }
    return f;
}

TapGainMatrix varying_channel(int n, int L, Rng& rng) {
    TapGainMatrix g;
    g.gains = ComplexMatrix(n, L);
    const ComplexMatrix h = random_matrix(2, L, rng) / std::sqrt(2.0 * L);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        g.gains.row(i) = h.row(0) * std::polar(1.0, 0.8 * t) + 0.3 * t * h.row(1);
    }
    return g;
}

int symbol_errors(const ComplexVector& a, const ComplexVector& b) {
    int e = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) e += std::abs(a[i] - b[i]) > 1e-9;
    return e;
}

}  // namespace

TEST(Qam, FourQamZeroLabel) {
    const QamConstellation q(4);
    const std::vector<std::uint8_t> bits{0, 0};
    const auto s = q.map(bits);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(std::abs(s[0] - cd(1.0, 1.0) / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(Qam, UnitEnergy) {
    for (int order : {4, 16}) {
        const QamConstellation q(order);
        double e = 0.0;
        for (const cd& p : q.points()) e += std::norm(p);
        EXPECT_NEAR(e / order, 1.0, 1e-14);
    }
}

TEST(Qam, GrayNeighboursDifferInOneBit) {
    for (int order : {4, 16}) {
        const QamConstellation q(order);
        const auto& pts = q.points();
        double dmin = 1e9;
        for (int a = 0; a < order; ++a)
            for (int b = a + 1; b < order; ++b) dmin = std::min(dmin, std::abs(pts[a] - pts[b]));
        int pairs = 0;
        for (int a = 0; a < order; ++a)
            for (int b = a + 1; b < order; ++b)
                if (std::abs(pts[a] - pts[b]) < dmin * (1.0 + 1e-9)) {
                    EXPECT_EQ(__builtin_popcount(static_cast<unsigned>(a ^ b)), 1) << a << " " << b;
                    ++pairs;
                }
        const int side = order == 4 ? 2 : 4;
        EXPECT_EQ(pairs, 2 * side * (side - 1));
    }
}

TEST(Qam, RoundTrip) {
    Rng rng(1);
    for (int order : {4, 16}) {
        const QamConstellation q(order);
        const auto bits = random_bits(10000, rng);
        const auto sym = q.map(bits);
        EXPECT_EQ(q.demap_hard(sym), bits);
        const auto llr = q.demap_soft(sym, 0.1);
        ASSERT_EQ(llr.size(), bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) EXPECT_EQ(llr[i] > 0.0, bits[i] == 0);
    }
}

TEST(Qam, SoftLlrMatchesMaxLogOracle) {
    const QamConstellation q(16);
    const double var = 0.3;
    const cd y(0.21, -0.66);
    const auto llr = q.demap_soft(std::span<const cd>(&y, 1), var);
    for (int b = 0; b < 4; ++b) {
        double d0 = 1e9, d1 = 1e9;
        for (int label = 0; label < 16; ++label) {
            const double d = std::norm(y - q.points()[label]);
            ((label >> (3 - b)) & 1 ? d1 : d0) = std::min((label >> (3 - b)) & 1 ? d1 : d0, d);
        }
        EXPECT_NEAR(llr[b], (d1 - d0) / var, 1e-12);
    }
}

TEST(Qam, RejectsBadInput) {
    EXPECT_THROW(QamConstellation(8), std::invalid_argument);
    const QamConstellation q(16);
    const std::vector<std::uint8_t> bits{0, 1, 1};
    EXPECT_THROW(q.map(bits), std::invalid_argument);
}

TEST(Lsmr, IdentityInOneIteration) {
    Rng rng(2);
    const ComplexVector b = random_matrix(20, 1, rng);
    const LinearOperator id = [](const ComplexVector& x) { return x; };
    LsmrOptions o;
    o.max_iterations = 1;
    const LsmrResult r = lsmr_solve(id, id, b, 20, o);
    EXPECT_LT((r.x - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lsmr, MatchesDenseSolve) {
    Rng rng(3);
    const int n = 64;
    const ComplexMatrix A = ComplexMatrix::Identity(n, n) * 4.0 + random_matrix(n, n, rng) * 0.25;
    const ComplexVector b = random_matrix(n, 1, rng);
    const LinearOperator ap = [&](const ComplexVector& x) { return ComplexVector(A * x); };
    const LinearOperator ad = [&](const ComplexVector& y) { return ComplexVector(A.adjoint() * y); };
    LsmrOptions o;
    o.max_iterations = 64;
    o.tolerance = 1e-14;
    const LsmrResult r = lsmr_solve(ap, ad, b, n, o);
    const ComplexVector want = A.partialPivLu().solve(b);
    EXPECT_LT((r.x - want).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lsmr, OverdeterminedLeastSquares) {
    Rng rng(4);
    const ComplexMatrix A = random_matrix(50, 12, rng);
    const ComplexVector b = random_matrix(50, 1, rng);
    const LinearOperator ap = [&](const ComplexVector& x) { return ComplexVector(A * x); };
    const LinearOperator ad = [&](const ComplexVector& y) { return ComplexVector(A.adjoint() * y); };
    LsmrOptions o;
    o.max_iterations = 100;
    o.tolerance = 1e-14;
    const ComplexVector want = A.colPivHouseholderQr().solve(b);
    EXPECT_LT((lsmr_solve(ap, ad, b, 12, o).x - want).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lsmr, LargeDampingShrinksToZero) {
    Rng rng(5);
    const ComplexMatrix A = random_matrix(30, 30, rng);
    const ComplexVector b = random_matrix(30, 1, rng);
    const LinearOperator ap = [&](const ComplexVector& x) { return ComplexVector(A * x); };
    const LinearOperator ad = [&](const ComplexVector& y) { return ComplexVector(A.adjoint() * y); };
    LsmrOptions o;
    o.max_iterations = 30;
    o.damping = 1e6;
    EXPECT_LT(lsmr_solve(ap, ad, b, 30, o).x.norm(), 1e-6 * b.norm());
}

TEST(Lsmr, ResidualNonIncreasing) {
    Rng rng(6);
    const ComplexMatrix A = random_matrix(80, 40, rng);
    const ComplexVector b = random_matrix(80, 1, rng);
    const LinearOperator ap = [&](const ComplexVector& x) { return ComplexVector(A * x); };
    const LinearOperator ad = [&](const ComplexVector& y) { return ComplexVector(A.adjoint() * y); };
    double prev = b.norm();
    for (int k = 1; k <= 40; ++k) {
        LsmrOptions o;
        o.max_iterations = k;
        o.tolerance = 0.0;
        const double res = (b - A * lsmr_solve(ap, ad, b, 40, o).x).norm();
        EXPECT_LE(res, prev * (1.0 + 1e-12)) << k;
        prev = res;
    }
}

TEST(Lsmr, DetectsBrokenAdjoint) {
    Rng rng(7);
    const ComplexMatrix A = random_matrix(10, 10, rng);
    const LinearOperator ap = [&](const ComplexVector& x) { return ComplexVector(A * x); };
    const LinearOperator wrong = [&](const ComplexVector& y) { return ComplexVector(A.transpose() * y); };
    EXPECT_THROW(lsmr_solve(ap, wrong, ComplexVector::Ones(10), 10, LsmrOptions{}), std::invalid_argument);
}

TEST(FrameOperatorTest, AdjointDotTest) {
    Rng rng(8);
    for (Waveform kind : {Waveform::otfs, Waveform::ofdm}) {
        FrameConfig cfg;
        const PilotPattern pattern = build_pilot_pattern(kind, cfg, default_pilot_power(cfg.L));
        const TapGainMatrix g = varying_channel(frame_length(kind, cfg), cfg.L, rng);
        const FrameOperator op(kind, cfg, pattern, g);
        const ComplexVector x = random_matrix(static_cast<int>(op.data_size()), 1, rng);
        const ComplexVector y = random_matrix(static_cast<int>(op.sample_size()), 1, rng);
        const cd lhs = op.apply(x).dot(y);
        const cd rhs = x.dot(op.apply_adjoint(y));
        EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::abs(lhs));
    }
}

TEST(Equalizer, IdentityChannelSinglePass) {
    Rng rng(9);
    const QamConstellation q(16);
    for (Waveform kind : {Waveform::otfs, Waveform::ofdm}) {
        FrameConfig cfg;
        const Frame f = make_frame(kind, cfg, q, rng);
        TapGainMatrix g;
        g.gains = ComplexMatrix::Zero(f.tx.size(), cfg.L);
        g.gains.col(0).setOnes();
        EqualizerConfig eq;
        eq.ic_iterations = 1;
        const EqualizerResult r = lsmr_ic_equalize(f.tx, g, kind, cfg, f.pattern, eq, q);
        EXPECT_EQ(symbol_errors(r.hard, f.data), 0);
        EXPECT_LT((r.soft - f.data).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Equalizer, StaticTwoTapZeroForcing) {
    Rng rng(10);
    const QamConstellation q(4);
    for (Waveform kind : {Waveform::otfs, Waveform::ofdm}) {
        FrameConfig cfg;
        const Frame f = make_frame(kind, cfg, q, rng);
        TapGainMatrix g;
        g.gains = ComplexMatrix::Zero(f.tx.size(), cfg.L);
        g.gains.col(0).setConstant(cd(0.9, 0.1));
        g.gains.col(1).setConstant(cd(-0.3, 0.4));
        EqualizerConfig eq;
        eq.lsmr_iterations = 200;
        const EqualizerResult r = lsmr_ic_equalize(apply_channel(f.tx, g), g, kind, cfg, f.pattern, eq, q);
        EXPECT_EQ(symbol_errors(r.hard, f.data), 0);
    }
}

TEST(Equalizer, MatchesDensePseudoInverseSchedule) {
    Rng rng(11);
    const QamConstellation q(4);
    FrameConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    cfg.n_cp = 2;
    cfg.L = 2;
    for (Waveform kind : {Waveform::otfs, Waveform::ofdm}) {
        const Frame f = make_frame(kind, cfg, q, rng);
        const TapGainMatrix g = varying_channel(static_cast<int>(f.tx.size()), cfg.L, rng);
        std::normal_distribution<double> d(0.0, 0.3);
        SampleVector y = apply_channel(f.tx, g);
        for (auto& v : y) v += cd(d(rng), d(rng));

        const FrameOperator op(kind, cfg, f.pattern, g);
        ComplexMatrix A(op.sample_size(), op.data_size());
        for (Eigen::Index c = 0; c < op.data_size(); ++c) A.col(c) = op.apply(ComplexVector::Unit(op.data_size(), c));
        const ComplexMatrix pinv = A.completeOrthogonalDecomposition().pseudoInverse();

        EqualizerConfig eq;
        eq.ic_iterations = 3;
        eq.lsmr_iterations = 400;
        const EqualizerResult r = lsmr_ic_equalize(y, g, kind, cfg, f.pattern, eq, q);

        const SampleVector base = y - op.pilot_response();
        ComplexVector decided = ComplexVector::Zero(op.data_size()), soft;
        for (int pass = 0; pass < eq.ic_iterations; ++pass) {
            soft = decided + pinv * (base - A * decided);
            for (Eigen::Index i = 0; i < soft.size(); ++i) decided[i] = q.nearest(soft[i]);
            ASSERT_LT(pass, static_cast<int>(r.pass_hard.size()));
            EXPECT_EQ(symbol_errors(r.pass_hard[pass], decided), 0) << pass;
        }
        EXPECT_LT((r.soft - soft).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Equalizer, IcPassesNeverAddErrorsNoiseless) {
    Rng rng(12);
    const QamConstellation q(16);
    for (Waveform kind : {Waveform::otfs, Waveform::ofdm})
        for (int trial = 0; trial < 5; ++trial) {
            FrameConfig cfg;
            const Frame f = make_frame(kind, cfg, q, rng);
            const TapGainMatrix g = varying_channel(static_cast<int>(f.tx.size()), cfg.L, rng);
            EqualizerConfig eq;
            eq.ic_iterations = 5;
            eq.lsmr_iterations = 4;
            const EqualizerResult r = lsmr_ic_equalize(apply_channel(f.tx, g), g, kind, cfg, f.pattern, eq, q);
            for (std::size_t p = 1; p < r.pass_hard.size(); ++p)
                EXPECT_LE(symbol_errors(r.pass_hard[p], f.data), symbol_errors(r.pass_hard[p - 1], f.data));
        }
}

TEST(Equalizer, RejectsBadConfig) {
    EqualizerConfig eq;
    eq.ic_iterations = 0;
    EXPECT_THROW(eq.validate(), std::invalid_argument);
    eq.ic_iterations = 1;
    eq.lsmr_iterations = 0;
    EXPECT_THROW(eq.validate(), std::invalid_argument);
}

TEST(ConvCode, ZeroInputZeroCodeword) {
    const CodecConfig c;
    const std::vector<std::uint8_t> zeros(50, 0);
    const auto out = conv_encode(zeros, c);
    EXPECT_EQ(out.size(), static_cast<std::size_t>(c.coded_length(50)));
    EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](auto b) { return b == 0; }));
}

TEST(ConvCode, ImpulseResponseIsGeneratorTaps) {
    const CodecConfig c;
    const std::vector<std::uint8_t> impulse{1};
    const auto out = conv_encode(impulse, c);
    // 133 octal = 1 011 011, 171 octal = 1 111 001, current input first.
    const int g0[7] = {1, 0, 1, 1, 0, 1, 1};
    const int g1[7] = {1, 1, 1, 1, 0, 0, 1};
    ASSERT_EQ(out.size(), 14u);
    for (int t = 0; t < 7; ++t) {
        EXPECT_EQ(out[2 * t], g0[t]) << t;
        EXPECT_EQ(out[2 * t + 1], g1[t]) << t;
    }
}

TEST(ConvCode, CleanRoundTrip) {
    Rng rng(13);
    const CodecConfig c;
    const auto bits = random_bits(10000, rng);
    const auto coded = conv_encode(bits, c);
    EXPECT_EQ(viterbi_decode_hard(coded, c), bits);
    std::vector<double> llr(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) llr[i] = coded[i] ? -1.0 : 1.0;
    EXPECT_EQ(viterbi_decode(llr, c), bits);
}

TEST(ConvCode, CorrectsSparseErrors) {
    Rng rng(14);
    const CodecConfig c;
    const auto bits = random_bits(100000, rng);
    const auto coded = conv_encode(bits, c);
    for (double p : {0.02, 0.05, 0.08}) {
        std::bernoulli_distribution flip(p);
        auto rx = coded;
        std::size_t raw = 0;
        for (auto& b : rx)
            if (flip(rng)) {
                b ^= 1;
                ++raw;
            }
        const double pre = static_cast<double>(raw) / rx.size();
        EXPECT_LE(ber(bits, viterbi_decode_hard(rx, c)), pre) << p;
    }
}

TEST(ConvCode, SoftBeatsHard) {
    Rng rng(15);
    const CodecConfig c;
    const auto bits = random_bits(100000, rng);
    const auto coded = conv_encode(bits, c);
    std::normal_distribution<double> n(0.0, 0.6);
    std::vector<double> llr(coded.size());
    std::vector<std::uint8_t> hard(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) {
        const double y = (coded[i] ? -1.0 : 1.0) + n(rng);
        llr[i] = y;
        hard[i] = y < 0.0;
    }
    const double pre = ber(coded, hard);
    ASSERT_LE(pre, 0.08);
    const double soft_ber = ber(bits, viterbi_decode(llr, c));
    const double hard_ber = ber(bits, viterbi_decode_hard(hard, c));
    EXPECT_LE(hard_ber, pre);
    EXPECT_LE(soft_ber, hard_ber);
}

TEST(ConvCode, ValidatesConfigAndLengths) {
    CodecConfig c;
    c.generators = {0033, 0171};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.generators = {0133, 0371};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    const CodecConfig ok;
    EXPECT_THROW(viterbi_decode(std::vector<double>(13, 1.0), ok), std::invalid_argument);
    EXPECT_THROW(viterbi_decode_hard(std::vector<std::uint8_t>(8, 0), ok), std::invalid_argument);
}

TEST(Ber, Basics) {
    const std::vector<std::uint8_t> a{0, 1, 1, 0}, b{1, 0, 0, 1}, h{0, 1, 0, 1};
    EXPECT_EQ(ber(a, a), 0.0);
    EXPECT_EQ(ber(a, b), 1.0);
    EXPECT_EQ(ber(a, h), 0.5);
    EXPECT_THROW(ber(a, std::vector<std::uint8_t>{0, 1}), std::invalid_argument);
}
