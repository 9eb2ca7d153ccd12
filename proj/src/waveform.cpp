#include <stdexcept>
#include <string>

#include "rislink/numerics.hpp"
#include "rislink/waveform.hpp"

namespace rislink {

void FrameConfig::validate() const {
    if (M < 1 || N < 1 || L < 1 || n_cp < 0)
        throw std::invalid_argument("FrameConfig: M, N, L must be positive and n_cp non-negative");
    if (!(delta_f > 0.0)) throw std::invalid_argument("FrameConfig: delta_f must be positive");
    if (n_cp < L - 1)
        throw std::invalid_argument("FrameConfig: n_cp = " + std::to_string(n_cp) +
                                    " does not cover channel length L = " + std::to_string(L));
    if (n_cp > M) throw std::invalid_argument("FrameConfig: n_cp longer than one block of M samples");
}

std::vector<int> PilotPattern::frame_indices() const {
    std::vector<int> out(indices);
    for (auto& i : out) i += frame_offset;
    return out;
}

int ofdm_symbol_count(int M, int N, int n_cp, int L) {
    const long num = static_cast<long>(M) * N + n_cp;
    const long den = static_cast<long>(M) + n_cp + 2L * L - 1;
    return static_cast<int>((num + den - 1) / den);
}

int ofdm_symbol_stride(const FrameConfig& cfg) { return cfg.M + cfg.n_cp + 2 * cfg.L - 1; }

int frame_length(Waveform kind, const FrameConfig& cfg) {
    if (kind == Waveform::otfs) return cfg.M * cfg.N + cfg.n_cp;
    return ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L) * ofdm_symbol_stride(cfg);
}

double default_pilot_power(int L, double data_power) { return 10.0 * data_power * (2 * L - 1); }

PilotPattern build_pilot_pattern(Waveform kind, const FrameConfig& cfg, double pilot_power) {
    cfg.validate();
    if (!(pilot_power >= 0.0)) throw std::invalid_argument("build_pilot_pattern: negative pilot power");

    PilotPattern p;
    p.kind = kind;
    p.guard_len = cfg.L - 1;
    p.amplitude = std::sqrt(pilot_power);
    p.L = cfg.L;
    p.frame_length = frame_length(kind, cfg);

    if (kind == Waveform::otfs) {
        // Pilot row plus 2(L-1) guard rows must leave at least one data row.
        if (cfg.M < 2 * cfg.L)
            throw std::invalid_argument("build_pilot_pattern: M = " + std::to_string(cfg.M) +
                                        " leaves no data rows for L = " + std::to_string(cfg.L));
        p.frame_offset = cfg.n_cp;
        for (int n = 0; n < cfg.N; ++n) p.indices.push_back(n * cfg.M);
    } else {
        const int symbols = ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L);
        const int stride = ofdm_symbol_stride(cfg);
        p.frame_offset = 0;
        for (int k = 0; k < symbols; ++k) p.indices.push_back(k * stride + cfg.n_cp + cfg.M + cfg.L - 1);
    }
    return p;
}

namespace {

std::vector<CellKind> otfs_layout(const FrameConfig& cfg) {
    std::vector<CellKind> layout(static_cast<std::size_t>(cfg.M) * cfg.N, CellKind::data);
    auto set_row = [&](int m, CellKind kind) {
        for (int k = 0; k < cfg.N; ++k) layout[static_cast<std::size_t>(m + k * cfg.M)] = kind;
    };
    set_row(0, CellKind::guard);
    layout[0] = CellKind::pilot;
    for (int m = 1; m <= cfg.L - 1; ++m) {
        set_row(m, CellKind::guard);
        set_row(cfg.M - m, CellKind::guard);
    }
    return layout;
}

void check_grid(int rows, int cols, const ComplexMatrix& symbols, int want_rows, int want_cols, const char* what) {
    if (rows != want_rows || cols != want_cols || symbols.rows() != want_rows || symbols.cols() != want_cols)
        throw std::invalid_argument(std::string(what) + ": grid dimensions do not match frame configuration");
}

}  // namespace

DelayDopplerGrid make_otfs_grid(const FrameConfig& cfg, const PilotPattern& pattern) {
    DelayDopplerGrid g(cfg.M, cfg.N);
    g.layout = otfs_layout(cfg);
    g.symbols(0, 0) = std::sqrt(static_cast<double>(cfg.N)) * pattern.amplitude;
    return g;
}

TimeFrequencyGrid make_ofdm_grid(const FrameConfig& cfg) {
    return TimeFrequencyGrid(cfg.M, ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L));
}

SampleVector otfs_modulate(const DelayDopplerGrid& grid, const FrameConfig& cfg) {
    check_grid(grid.rows, grid.cols, grid.symbols, cfg.M, cfg.N, "otfs_modulate");
    const int mn = cfg.M * cfg.N;
    const ComplexVector body = doppler_block_transform(grid.vec(), cfg.M, cfg.N, true);
    SampleVector s(mn + cfg.n_cp);
    s.head(cfg.n_cp) = body.tail(cfg.n_cp);
    s.tail(mn) = body;
    return s;
}

DelayDopplerGrid otfs_demodulate(const SampleVector& samples, const FrameConfig& cfg) {
    const int mn = cfg.M * cfg.N;
    if (samples.size() != mn + cfg.n_cp) throw std::invalid_argument("otfs_demodulate: length mismatch");
    const ComplexVector x = doppler_block_transform(samples.tail(mn), cfg.M, cfg.N, false);
    DelayDopplerGrid g(cfg.M, cfg.N);
    g.layout = otfs_layout(cfg);
    g.symbols = x.reshaped(cfg.M, cfg.N);
    return g;
}

ComplexMatrix otfs_modulate_adjoint(const SampleVector& samples, const FrameConfig& cfg) {
    const int mn = cfg.M * cfg.N;
    if (samples.size() != mn + cfg.n_cp) throw std::invalid_argument("otfs_modulate_adjoint: length mismatch");
    ComplexVector z = samples.tail(mn);
    z.tail(cfg.n_cp) += samples.head(cfg.n_cp);
    return doppler_block_transform(z, cfg.M, cfg.N, false).reshaped(cfg.M, cfg.N);
}

SampleVector ofdm_modulate(const TimeFrequencyGrid& grid, const FrameConfig& cfg, const PilotPattern& pattern) {
    const int symbols = ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L);
    check_grid(grid.rows, grid.cols, grid.symbols, cfg.M, symbols, "ofdm_modulate");
    if (pattern.kind != Waveform::ofdm || pattern.pilot_count() != symbols)
        throw std::invalid_argument("ofdm_modulate: pilot pattern does not match frame");

    const int stride = ofdm_symbol_stride(cfg);
    const auto& plan = dft_plan(static_cast<std::size_t>(cfg.M));
    SampleVector s = SampleVector::Zero(static_cast<Eigen::Index>(symbols) * stride);
    std::vector<cd> body(static_cast<std::size_t>(cfg.M));
    for (int k = 0; k < symbols; ++k) {
        for (int m = 0; m < cfg.M; ++m) body[m] = grid.symbols(m, k);
        plan.inverse(body);
        const int base = k * stride;
        for (int i = 0; i < cfg.n_cp; ++i) s[base + i] = body[cfg.M - cfg.n_cp + i];
        for (int m = 0; m < cfg.M; ++m) s[base + cfg.n_cp + m] = body[m];
        s[pattern.frame_index(k)] = pattern.amplitude;
    }
    return s;
}

TimeFrequencyGrid ofdm_demodulate(const SampleVector& samples, const FrameConfig& cfg, const PilotPattern& pattern) {
    const int symbols = ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L);
    const int stride = ofdm_symbol_stride(cfg);
    if (samples.size() != static_cast<Eigen::Index>(symbols) * stride)
        throw std::invalid_argument("ofdm_demodulate: length mismatch");
    if (pattern.kind != Waveform::ofdm || pattern.pilot_count() != symbols)
        throw std::invalid_argument("ofdm_demodulate: pilot pattern does not match frame");

    const auto& plan = dft_plan(static_cast<std::size_t>(cfg.M));
    TimeFrequencyGrid g(cfg.M, symbols);
    std::vector<cd> body(static_cast<std::size_t>(cfg.M));
    for (int k = 0; k < symbols; ++k) {
        const int base = k * stride + cfg.n_cp;
        for (int m = 0; m < cfg.M; ++m) body[m] = samples[base + m];
        plan.forward(body);
        for (int m = 0; m < cfg.M; ++m) g.symbols(m, k) = body[m];
    }
    return g;
}

ComplexMatrix ofdm_modulate_adjoint(const SampleVector& samples, const FrameConfig& cfg) {
    const int symbols = ofdm_symbol_count(cfg.M, cfg.N, cfg.n_cp, cfg.L);
    const int stride = ofdm_symbol_stride(cfg);
    if (samples.size() != static_cast<Eigen::Index>(symbols) * stride)
        throw std::invalid_argument("ofdm_modulate_adjoint: length mismatch");

    const auto& plan = dft_plan(static_cast<std::size_t>(cfg.M));
    ComplexMatrix out(cfg.M, symbols);
    std::vector<cd> body(static_cast<std::size_t>(cfg.M));
    for (int k = 0; k < symbols; ++k) {
        const int base = k * stride;
        for (int m = 0; m < cfg.M; ++m) body[m] = samples[base + cfg.n_cp + m];
        for (int i = 0; i < cfg.n_cp; ++i) body[cfg.M - cfg.n_cp + i] += samples[base + i];
        plan.forward(body);
        for (int m = 0; m < cfg.M; ++m) out(m, k) = body[m];
    }
    return out;
}

}  // namespace rislink
