#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "rislink/numerics.hpp"
#include "rislink/waveform.hpp"

using namespace rislink;

namespace {

FrameConfig desk() { return FrameConfig{32, 8, 8, 60e3, 4}; }

ComplexMatrix random_matrix(int r, int c, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = {g(rng), g(rng)};
    return m;
}

}  // namespace

TEST(OfdmSymbolCount, PaperScaleExample) { EXPECT_EQ(ofdm_symbol_count(128, 32, 32, 16), 22); }

TEST(OfdmSymbolCount, SmallestCountCoveringOtfsBudget) {
    for (int M : {4, 16, 64})
        for (int N : {1, 3, 8})
            for (int L : {1, 2, 4}) {
                const int budget = M * N + L - 1;
                const int stride = M + (L - 1) + 2 * L - 1;
                const int count = ofdm_symbol_count(M, N, L - 1, L);
                EXPECT_GE(count * stride, budget);
                EXPECT_LT((count - 1) * stride, budget);
                EXPECT_LE(count, N);
            }
}

TEST(OfdmSymbolCount, DeskExample) { EXPECT_EQ(ofdm_symbol_count(32, 8, 8, 4), 6); }

TEST(FrameConfig, DerivedResolutions) {
    const FrameConfig c = desk();
    EXPECT_DOUBLE_EQ(c.sample_period(), 1.0 / 1.92e6);
    EXPECT_DOUBLE_EQ(c.doppler_resolution(), 1.92e6 / 256.0);
}

TEST(FrameConfig, RejectsShortCyclicPrefix) {
    FrameConfig c = desk();
    c.n_cp = 2;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(OtfsModulate, SingleBlockIsPrefixedDelayColumn) {
    FrameConfig c{8, 1, 3, 60e3, 2};
    DelayDopplerGrid g(8, 1);
    for (int m = 0; m < 8; ++m) g.symbols(m, 0) = cd(m + 1, -m);
    const SampleVector s = otfs_modulate(g, c);
    ASSERT_EQ(s.size(), 11);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(s[i], g.symbols(5 + i, 0));
    for (int m = 0; m < 8; ++m) EXPECT_NEAR(std::abs(s[3 + m] - g.symbols(m, 0)), 0.0, 1e-15);
}

TEST(OtfsModulate, DdImpulseIsConstantAtDelayZero) {
    const FrameConfig c = desk();
    DelayDopplerGrid g(c.M, c.N);
    g.symbols(0, 0) = std::sqrt(static_cast<double>(c.N));
    const SampleVector s = otfs_modulate(g, c);
    for (int n = 0; n < c.N; ++n)
        for (int m = 0; m < c.M; ++m) {
            const cd want = m == 0 ? cd(1.0, 0.0) : cd{};
            EXPECT_NEAR(std::abs(s[c.n_cp + n * c.M + m] - want), 0.0, 1e-14);
        }
}

TEST(OtfsModulate, RoundTrip) {
    Rng rng(11);
    const FrameConfig c = desk();
    DelayDopplerGrid g(c.M, c.N);
    g.symbols = random_matrix(c.M, c.N, rng);
    const DelayDopplerGrid back = otfs_demodulate(otfs_modulate(g, c), c);
    EXPECT_LT((back.symbols - g.symbols).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OtfsModulate, EnergyIsGridPlusPrefix) {
    Rng rng(12);
    const FrameConfig c = desk();
    DelayDopplerGrid g(c.M, c.N);
    g.symbols = random_matrix(c.M, c.N, rng);
    const SampleVector s = otfs_modulate(g, c);
    const double cp = s.head(c.n_cp).squaredNorm();
    EXPECT_NEAR(s.squaredNorm(), g.symbols.squaredNorm() + cp, 1e-10);
    EXPECT_LT((s.head(c.n_cp) - s.tail(c.n_cp)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(OtfsModulate, RejectsWrongSizes) {
    const FrameConfig c = desk();
    EXPECT_THROW(otfs_modulate(DelayDopplerGrid(16, 8), c), std::invalid_argument);
    EXPECT_THROW(otfs_demodulate(SampleVector::Zero(256), c), std::invalid_argument);
}

TEST(OtfsModulate, AdjointIdentity) {
    Rng rng(13);
    const FrameConfig c = desk();
    DelayDopplerGrid g(c.M, c.N);
    g.symbols = random_matrix(c.M, c.N, rng);
    const ComplexVector r = random_matrix(c.M * c.N + c.n_cp, 1, rng);
    const cd lhs = otfs_modulate(g, c).dot(r);
    const cd rhs = g.symbols.reshaped().dot(otfs_modulate_adjoint(r, c).reshaped());
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::abs(lhs));
}

TEST(PilotPattern, OtfsDeskLayout) {
    const FrameConfig c = desk();
    const PilotPattern p = build_pilot_pattern(Waveform::otfs, c, default_pilot_power(c.L));
    const std::vector<int> want{0, 32, 64, 96, 128, 160, 192, 224};
    EXPECT_EQ(p.indices, want);
    EXPECT_EQ(p.frame_offset, c.n_cp);
    EXPECT_EQ(p.frame_length, 264);
    EXPECT_DOUBLE_EQ(p.amplitude * p.amplitude, 70.0);

    const DelayDopplerGrid g = make_otfs_grid(c, p);
    EXPECT_EQ(g.data_cells().size(), 200u);
    for (int m : {1, 2, 3, 29, 30, 31})
        for (int n = 0; n < c.N; ++n) EXPECT_EQ(g.kind(m, n), CellKind::guard);
    for (int m = 4; m <= 28; ++m) EXPECT_EQ(g.kind(m, 3), CellKind::data);
    EXPECT_EQ(g.kind(0, 0), CellKind::pilot);
}

TEST(PilotPattern, OtfsSingleTapHasNoGuardRows) {
    const FrameConfig c{16, 4, 0, 60e3, 1};
    const PilotPattern p = build_pilot_pattern(Waveform::otfs, c, 1.0);
    EXPECT_EQ(make_otfs_grid(c, p).data_cells().size(), static_cast<std::size_t>(15 * 4));
}

TEST(PilotPattern, OfdmDeskHasSixPilots) {
    const FrameConfig c = desk();
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, default_pilot_power(c.L));
    EXPECT_EQ(p.pilot_count(), 6);
    EXPECT_EQ(p.frame_length, 6 * 47);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(p.frame_index(k), k * 47 + 8 + 32 + 3);
}

TEST(PilotPattern, PilotsAreSeparatedByGuards) {
    for (Waveform w : {Waveform::otfs, Waveform::ofdm}) {
        const FrameConfig c = desk();
        const auto idx = build_pilot_pattern(w, c, 1.0).frame_indices();
        for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_GE(idx[i] - idx[i - 1], 2 * c.L - 1);
        EXPECT_LE(idx.back() + c.L, frame_length(w, c));
    }
}

TEST(PilotPattern, RejectsTooNarrowBlocks) {
    const FrameConfig c{6, 4, 4, 60e3, 4};
    EXPECT_THROW(build_pilot_pattern(Waveform::otfs, c, 1.0), std::invalid_argument);
}

TEST(FrameLength, OfdmWithinOneSymbolOfOtfs) {
    for (const FrameConfig& c : {desk(), FrameConfig{128, 32, 82, 60e3, 41}, FrameConfig{64, 16, 16, 60e3, 8}}) {
        const int otfs = frame_length(Waveform::otfs, c);
        const int ofdm = frame_length(Waveform::ofdm, c);
        const int stride = ofdm_symbol_stride(c);
        EXPECT_GE(ofdm, otfs);
        EXPECT_GE(otfs, ofdm - stride + 1);
    }
}

TEST(OfdmModulate, EmptySymbolCarriesOnlyPilot) {
    const FrameConfig c{16, 1, 4, 60e3, 3};
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, 9.0);
    ASSERT_EQ(p.pilot_count(), 1);
    const SampleVector s = ofdm_modulate(make_ofdm_grid(c), c, p);
    ASSERT_EQ(s.size(), 4 + 16 + 5);
    for (int i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], i == p.frame_index(0) ? cd(3.0, 0.0) : cd{});
}

TEST(OfdmModulate, SubcarrierZeroImpulseIsFlat) {
    const FrameConfig c = desk();
    PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, 0.0);
    TimeFrequencyGrid g = make_ofdm_grid(c);
    g.symbols(0, 2) = 1.0;
    const SampleVector s = ofdm_modulate(g, c, p);
    const int base = 2 * ofdm_symbol_stride(c) + c.n_cp;
    for (int m = 0; m < c.M; ++m) EXPECT_NEAR(std::abs(s[base + m] - cd(1.0 / std::sqrt(32.0), 0.0)), 0.0, 1e-15);
}

TEST(OfdmModulate, RoundTrip) {
    Rng rng(14);
    const FrameConfig c = desk();
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, default_pilot_power(c.L));
    TimeFrequencyGrid g = make_ofdm_grid(c);
    g.symbols = random_matrix(g.rows, g.cols, rng);
    const TimeFrequencyGrid back = ofdm_demodulate(ofdm_modulate(g, c, p), c, p);
    EXPECT_LT((back.symbols - g.symbols).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OfdmModulate, EnergyIsGridPlusPrefixesPlusPilots) {
    Rng rng(15);
    const FrameConfig c = desk();
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, 70.0);
    TimeFrequencyGrid g = make_ofdm_grid(c);
    g.symbols = random_matrix(g.rows, g.cols, rng);
    const SampleVector s = ofdm_modulate(g, c, p);
    const int stride = ofdm_symbol_stride(c);
    double cp = 0.0;
    for (int k = 0; k < g.cols; ++k) cp += s.segment(k * stride, c.n_cp).squaredNorm();
    EXPECT_NEAR(s.squaredNorm(), g.symbols.squaredNorm() + cp + 70.0 * g.cols, 1e-9);
}

TEST(OfdmModulate, AdjointIdentity) {
    Rng rng(16);
    const FrameConfig c = desk();
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, 0.0);
    TimeFrequencyGrid g = make_ofdm_grid(c);
    g.symbols = random_matrix(g.rows, g.cols, rng);
    const ComplexVector r = random_matrix(p.frame_length, 1, rng);
    const cd lhs = ofdm_modulate(g, c, p).dot(r);
    const cd rhs = g.symbols.reshaped().dot(ofdm_modulate_adjoint(r, c).reshaped());
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::abs(lhs));
}

TEST(OfdmModulate, RejectsMismatchedPattern) {
    const FrameConfig c = desk();
    const PilotPattern otfs = build_pilot_pattern(Waveform::otfs, c, 1.0);
    EXPECT_THROW(ofdm_modulate(make_ofdm_grid(c), c, otfs), std::invalid_argument);
    const PilotPattern p = build_pilot_pattern(Waveform::ofdm, c, 1.0);
    EXPECT_THROW(ofdm_demodulate(SampleVector::Zero(100), c, p), std::invalid_argument);
}
