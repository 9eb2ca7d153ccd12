#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rislink/channel.hpp"
#include "rislink/detection.hpp"
#include "rislink/estimation.hpp"
#include "rislink/phase_noise.hpp"
#include "rislink/waveform.hpp"

namespace rislink {

// Invalid configuration (bad value, unknown key, unreadable file).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Estimator { proposed, bem, spline, perfect_csi };
Estimator parse_estimator(std::string_view name);
std::string to_string(Estimator e);

Waveform parse_waveform(std::string_view name);
std::string to_string(Waveform w);

struct ChannelSettings {
    std::string profile = "tdl_c";
    double delay_spread = 80e-9;        // s
    std::optional<double> doppler_hz;   // overrides velocity/carrier when set
    double velocity_kmh = 500.0;
    double carrier_hz = 5.9e9;
    int elements = 8;
    RisStrategy ris_strategy = RisStrategy::statistical_align;
    int sinusoids_per_path = 1;
    // Which hop carries the Doppler: "rx" (element -> RX), "tx" (TX -> element)
    // or "both".
    std::string mobile = "rx";
    double max_doppler() const;
    double uplink_doppler() const { return mobile == "rx" ? 0.0 : max_doppler(); }
    double downlink_doppler() const { return mobile == "tx" ? 0.0 : max_doppler(); }
};

struct OscillatorSettings {
    OscillatorKind kind = OscillatorKind::fro;
    double beta_pn = 2e3;            // Hz
    double loop_coefficient = 1e5;   // 1/s, PLL only
};

struct CodingSettings {
    bool enabled = false;
    CodecConfig codec;
};

struct SimConfig {
    Waveform waveform = Waveform::otfs;
    FrameConfig frame;
    ChannelSettings channel;
    OscillatorSettings oscillator;
    Estimator estimator = Estimator::proposed;
    double k_over = 2.0;
    double threshold = 3.0;
    EqualizerConfig equalizer;
    CodingSettings coding;
    int qam_order = 4;
    double snr_db = 10.0;  // +inf means noiseless
    int frames = 500;
    std::uint64_t base_seed = 1;

    double noise_variance() const;
    double sample_period() const { return frame.sample_period(); }
    OscillatorModel oscillator_model() const;
    CorrelationModel correlation_model() const;
    // Physical cascade length the channel produces; never above frame.L.
    int channel_taps() const;
    // Throws ConfigError.
    void validate() const;
};

// Desk-scale and paper-scale profiles.
SimConfig desk_config();
SimConfig paper_config();

nlohmann::json to_json(const SimConfig& cfg);
// Missing keys keep the defaults of `base`; unknown keys are a ConfigError.
SimConfig config_from_json(const nlohmann::json& j, const SimConfig& base = desk_config());
SimConfig load_config(const std::string& path, const SimConfig& base = desk_config());
nlohmann::json parse_toml(std::string_view text);
// Applies "a.b.c=value" to a config document. The value is read as JSON when
// it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);
void set_dotted(nlohmann::json& doc, std::string_view key, nlohmann::json value);

struct FrameResult {
    double nmse = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bit_count = 0;
    std::uint64_t coded_bit_errors = 0;
    std::uint64_t coded_bit_count = 0;
};

// Artifacts shared read-only by all frames of one operating point.
struct FrameContext {
    SimConfig cfg;
    PilotPattern pattern;
    std::shared_ptr<const QamConstellation> constellation;
    std::shared_ptr<const WienerFilterBank> wiener;  // set for the proposed estimator
};

// Wiener banks keyed by everything build_wiener depends on. Thread-safe. With a
// directory set, banks are also loaded from and saved to disk.
class WienerCache {
public:
    explicit WienerCache(std::string directory = {}) : directory_(std::move(directory)) {}
    std::shared_ptr<const WienerFilterBank> get(const CorrelationModel& model, const std::vector<int>& pilots,
                                                int n_samples, double noise_variance, double pilot_power);
    std::size_t size() const;

private:
    std::string directory_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const WienerFilterBank>> banks_;
};

FrameContext make_context(const SimConfig& cfg, WienerCache* cache = nullptr);
FrameResult run_frame(const FrameContext& ctx, std::uint64_t frame_seed);
FrameResult run_frame(const SimConfig& cfg, std::uint64_t frame_seed);

struct MetricsRecord {
    SimConfig config;
    double nmse_mean = 0.0;
    double ber = 0.0;
    double coded_ber = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bit_count = 0;
    std::uint64_t coded_bit_errors = 0;
    std::uint64_t coded_bit_count = 0;
    std::uint64_t frames_run = 0;
    std::optional<double> wall_time_s;
    std::string digest;               // FNV-1a over per-frame seeds and results
    std::vector<FrameResult> frames;  // not emitted
};

struct RunOptions {
    int workers = 1;
    bool timing = false;
    bool keep_frames = false;
    std::string wiener_cache_dir;
};

// SIM_WORKERS when set and valid, else the hardware concurrency.
int default_workers();

MetricsRecord run_point(const SimConfig& cfg, const RunOptions& opts, WienerCache* cache = nullptr);

struct SweepAxis {
    std::string key;  // dotted config key; snr, beta_pn, Q are aliases
    std::vector<nlohmann::json> values;
};

// "snr=0:2:20" (inclusive range), "estimator=proposed,bem", "Q=4,8,16".
SweepAxis parse_axis(std::string_view spec);
std::string canonical_axis_key(std::string_view key);

// Records in Cartesian order: first axis outermost, waveforms innermost. An
// empty waveform list means the template's waveform only.
std::vector<MetricsRecord> run_sweep(const SimConfig& base, const std::vector<SweepAxis>& axes,
                                     const std::vector<Waveform>& waveforms, const RunOptions& opts);

enum class OutputFormat { csv, jsonl };
OutputFormat parse_format(std::string_view name);

// Flat column set: dotted config keys then metric fields, in a fixed order.
std::vector<std::string> record_columns(bool timing);
void emit_results(const std::vector<MetricsRecord>& records, OutputFormat format, std::ostream& out,
                  bool timing = false);
void emit_results(const std::vector<MetricsRecord>& records, OutputFormat format, const std::string& path,
                  bool timing = false);
std::vector<MetricsRecord> parse_results(std::istream& in, OutputFormat format);

bool operator==(const MetricsRecord& a, const MetricsRecord& b);

}  // namespace rislink
