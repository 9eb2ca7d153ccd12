#pragma once

#include <vector>

#include "rislink/types.hpp"

namespace rislink {

// Frame geometry shared by both waveforms. For OTFS, M is the number of
// delay bins and N the number of Doppler bins; OFDM reuses M as the
// subcarrier count and derives its symbol count from the OTFS frame budget.
struct FrameConfig {
    int M = 32;
    int N = 8;
    int n_cp = 8;
    double delta_f = 60e3;  // Hz
    int L = 4;              // cascade channel length in taps

    double sample_period() const { return 1.0 / (M * delta_f); }
    double delay_resolution() const { return sample_period(); }
    double doppler_resolution() const { return 1.0 / (N * M * sample_period()); }

    // Throws std::invalid_argument unless all sizes are positive and the
    // cyclic prefix covers the channel (n_cp >= L - 1).
    void validate() const;
};

struct DelayDopplerTag {};
struct TimeFrequencyTag {};

// rows x cols symbol grid with a per-cell layout tag. Cell (r, c) lives at
// linear index r + c*rows, matching vec() of the symbol matrix.
template <class Domain>
struct SymbolGrid {
    int rows = 0;
    int cols = 0;
    ComplexMatrix symbols;
    std::vector<CellKind> layout;

    SymbolGrid() = default;
    SymbolGrid(int r, int c)
        : rows(r), cols(c), symbols(ComplexMatrix::Zero(r, c)),
          layout(static_cast<std::size_t>(r) * c, CellKind::data) {}

    CellKind kind(int r, int c) const { return layout[static_cast<std::size_t>(r + c * rows)]; }

    std::vector<int> data_cells() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (layout[i] == CellKind::data) out.push_back(static_cast<int>(i));
        return out;
    }

    ComplexVector vec() const { return symbols.reshaped(); }
};

// M x N delay-Doppler grid (OTFS payload).
using DelayDopplerGrid = SymbolGrid<DelayDopplerTag>;
// M x N' time-frequency grid (OFDM payload).
using TimeFrequencyGrid = SymbolGrid<TimeFrequencyTag>;

// Delay-time impulse pilots. `indices` are positions in the pilot-bearing
// delay-time stream; adding `frame_offset` (the OTFS cyclic prefix, zero for
// OFDM) gives the position in the transmitted frame.
struct PilotPattern {
    Waveform kind = Waveform::otfs;
    std::vector<int> indices;
    int frame_offset = 0;
    int guard_len = 0;        // zero samples on each side of the pilot
    double amplitude = 0.0;   // delay-time pilot amplitude, sqrt(sigma_p^2)
    int L = 1;
    int frame_length = 0;     // total transmitted samples

    int pilot_count() const { return static_cast<int>(indices.size()); }
    int frame_index(int p) const { return indices[static_cast<std::size_t>(p)] + frame_offset; }
    std::vector<int> frame_indices() const;
};

// N' = ceil((MN + N_cp) / (M + N_cp + 2L - 1)).
int ofdm_symbol_count(int M, int N, int n_cp, int L);

// Samples per OFDM symbol including its CP and trailing pilot segment.
int ofdm_symbol_stride(const FrameConfig& cfg);

// Transmitted samples per frame: MN + N_cp for OTFS, N' * stride for OFDM.
int frame_length(Waveform kind, const FrameConfig& cfg);

// Default pilot power: ten times the data power spread over the 2L-1 samples
// a pilot and its guards occupy.
double default_pilot_power(int L, double data_power = 1.0);

// Pilot geometry. OTFS: one pilot at delay row 0 of every time block, guard
// rows 1..L-1 and M-L+1..M-1. OFDM: one pilot segment after every symbol.
// Throws std::invalid_argument when a block has no room left for data.
PilotPattern build_pilot_pattern(Waveform kind, const FrameConfig& cfg, double pilot_power);

// Empty OTFS grid with the pilot/guard layout applied and the pilot placed at
// (delay 0, Doppler 0) with amplitude sqrt(N) * pattern.amplitude.
DelayDopplerGrid make_otfs_grid(const FrameConfig& cfg, const PilotPattern& pattern);

// Empty M x N' OFDM grid; every cell carries data.
TimeFrequencyGrid make_ofdm_grid(const FrameConfig& cfg);

SampleVector otfs_modulate(const DelayDopplerGrid& grid, const FrameConfig& cfg);
DelayDopplerGrid otfs_demodulate(const SampleVector& samples, const FrameConfig& cfg);

SampleVector ofdm_modulate(const TimeFrequencyGrid& grid, const FrameConfig& cfg, const PilotPattern& pattern);
TimeFrequencyGrid ofdm_demodulate(const SampleVector& samples, const FrameConfig& cfg, const PilotPattern& pattern);

// Adjoint of the linear part of each modulator (pilots excluded): maps a
// frame-length sample vector back onto grid coordinates.
ComplexMatrix otfs_modulate_adjoint(const SampleVector& samples, const FrameConfig& cfg);
ComplexMatrix ofdm_modulate_adjoint(const SampleVector& samples, const FrameConfig& cfg);

}  // namespace rislink
