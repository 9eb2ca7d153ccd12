#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <thread>

#include "rislink/harness.hpp"

namespace rislink {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
}

void fnv_mix(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::vector<int> data_cells_of(const SimConfig& cfg, const PilotPattern& pattern) {
    if (cfg.waveform == Waveform::otfs) return make_otfs_grid(cfg.frame, pattern).data_cells();
    return make_ofdm_grid(cfg.frame).data_cells();
}

std::vector<std::uint8_t> random_bits(std::size_t count, Rng& rng) {
    std::vector<std::uint8_t> out(count);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 63);
    return out;
}

std::uint64_t count_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] & 1u) != (b[i] & 1u);
    return e;
}

// Seed-stream ids of one frame.
enum Stream : std::uint64_t { kBits = 0, kChannel = 1, kPhase = 2, kNoise = 3, kInterleaver = 4 };

}  // namespace

std::shared_ptr<const WienerFilterBank> WienerCache::get(const CorrelationModel& model,
                                                         const std::vector<int>& pilots, int n_samples,
                                                         double noise_variance, double pilot_power) {
    std::string key = exact(model.max_doppler) + "|" + exact(model.sample_period) + "|" +
                      to_string(model.oscillator.kind) + "|" + exact(model.oscillator.linewidth) + "|" +
                      exact(model.oscillator.loop_coefficient) + "|" + exact(model.oscillator.sample_period) + "|" +
                      std::to_string(n_samples) + "|" + exact(noise_variance) + "|" + exact(pilot_power) + "|";
    for (int p : pilots) key += std::to_string(p) + ",";

    std::lock_guard lock(mutex_);
    if (auto it = banks_.find(key); it != banks_.end()) return it->second;

    std::shared_ptr<const WienerFilterBank> bank;
    std::filesystem::path file;
    if (!directory_.empty()) {
        std::uint64_t h = kFnvOffset;
        fnv_mix(h, key);
        file = std::filesystem::path(directory_) / ("wiener_" + hex64(h) + ".bin");
        if (std::filesystem::exists(file)) {
            auto loaded = std::make_shared<WienerFilterBank>(load_wiener(file.string()));
            if (loaded->pilot_indices == pilots && loaded->samples() == n_samples &&
                loaded->noise_variance == noise_variance && loaded->pilot_power == pilot_power)
                bank = std::move(loaded);
        }
    }
    if (!bank) {
        bank = std::make_shared<const WienerFilterBank>(
            build_wiener(model, pilots, n_samples, noise_variance, pilot_power));
        if (!file.empty()) {
            std::filesystem::create_directories(directory_);
            save_wiener(*bank, file.string());
        }
    }
    banks_.emplace(key, bank);
    return bank;
}

std::size_t WienerCache::size() const {
    std::lock_guard lock(mutex_);
    return banks_.size();
}

FrameContext make_context(const SimConfig& cfg, WienerCache* cache) {
    cfg.validate();
    FrameContext ctx;
    ctx.cfg = cfg;
    ctx.pattern = build_pilot_pattern(cfg.waveform, cfg.frame, default_pilot_power(cfg.frame.L));
    ctx.constellation = std::make_shared<const QamConstellation>(cfg.qam_order);
    if (cfg.estimator == Estimator::proposed) {
        const double pilot_power = ctx.pattern.amplitude * ctx.pattern.amplitude;
        const auto pilots = ctx.pattern.frame_indices();
        const int n = ctx.pattern.frame_length;
        if (cache) {
            ctx.wiener = cache->get(cfg.correlation_model(), pilots, n, cfg.noise_variance(), pilot_power);
        } else {
            ctx.wiener = std::make_shared<const WienerFilterBank>(
                build_wiener(cfg.correlation_model(), pilots, n, cfg.noise_variance(), pilot_power));
        }
    }
    return ctx;
}

FrameResult run_frame(const FrameContext& ctx, std::uint64_t frame_seed) {
    const SimConfig& cfg = ctx.cfg;
    const PilotPattern& pattern = ctx.pattern;
    const QamConstellation& qam = *ctx.constellation;
    const int n = pattern.frame_length;
    const int L = cfg.frame.L;
    const double ts = cfg.sample_period();
    const double noise_variance = cfg.noise_variance();

    Rng bits_rng = make_stream(frame_seed, kBits);
    Rng channel_rng = make_stream(frame_seed, kChannel);
    Rng phase_rng = make_stream(frame_seed, kPhase);
    Rng noise_rng = make_stream(frame_seed, kNoise);
    Rng perm_rng = make_stream(frame_seed, kInterleaver);

    // Bits and symbols.
    const std::vector<int> cells = data_cells_of(cfg, pattern);
    const std::size_t capacity = cells.size() * static_cast<std::size_t>(qam.bits_per_symbol());
    std::vector<std::uint8_t> info;
    std::vector<std::uint8_t> tx_bits;
    std::vector<std::size_t> perm;
    std::size_t coded_len = 0;
    if (cfg.coding.enabled) {
        const auto& codec = cfg.coding.codec;
        const int k = static_cast<int>(capacity / 2) - codec.tail_bits();
        info = random_bits(static_cast<std::size_t>(k), bits_rng);
        std::vector<std::uint8_t> stream = conv_encode(info, codec);
        coded_len = stream.size();
        const auto pad = random_bits(capacity - coded_len, bits_rng);
        stream.insert(stream.end(), pad.begin(), pad.end());
        perm.resize(capacity);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), perm_rng);
        tx_bits.resize(capacity);
        for (std::size_t i = 0; i < capacity; ++i) tx_bits[perm[i]] = stream[i];
    } else {
        tx_bits = random_bits(capacity, bits_rng);
    }
    const std::vector<cd> symbols = qam.map(tx_bits);

    SampleVector s;
    if (cfg.waveform == Waveform::otfs) {
        DelayDopplerGrid grid = make_otfs_grid(cfg.frame, pattern);
        auto flat = grid.symbols.reshaped();
        for (std::size_t i = 0; i < cells.size(); ++i) flat[cells[i]] = symbols[i];
        s = otfs_modulate(grid, cfg.frame);
    } else {
        TimeFrequencyGrid grid = make_ofdm_grid(cfg.frame);
        auto flat = grid.symbols.reshaped();
        for (std::size_t i = 0; i < cells.size(); ++i) flat[cells[i]] = symbols[i];
        s = ofdm_modulate(grid, cfg.frame, pattern);
    }

    // Channel, phase noise, noise.
    const double f_d = cfg.channel.max_doppler();
    RisChannel ris;
    ris.elements.resize(static_cast<std::size_t>(cfg.channel.elements));
    for (auto& e : ris.elements) {
        e.uplink = sample_link(tdl_c(), cfg.channel.delay_spread, ts, cfg.channel.uplink_doppler(), channel_rng,
                               cfg.channel.sinusoids_per_path);
        e.downlink = sample_link(tdl_c(), cfg.channel.delay_spread, ts, cfg.channel.downlink_doppler(), channel_rng,
                                 cfg.channel.sinusoids_per_path);
    }
    ris = design_ris_phases(std::move(ris), cfg.channel.ris_strategy, channel_rng);
    TapGainMatrix g = cascade_ris_channel(ris, n, ts);
    if (g.taps() < L) {
        ComplexMatrix padded = ComplexMatrix::Zero(n, L);
        padded.leftCols(g.taps()) = g.gains;
        g.gains = std::move(padded);
    }

    SampleVector r = apply_channel(s, g);
    TapGainMatrix g_eff = g;
    if (cfg.oscillator.kind != OscillatorKind::none && cfg.oscillator.beta_pn > 0.0) {
        const PhaseNoiseTrace trace = gen_trace(cfg.oscillator_model(), n, phase_rng);
        r = apply_phase_noise(r, trace);
        for (int i = 0; i < n; ++i) g_eff.gains.row(i) *= std::polar(1.0, trace.theta[i]);
        g_eff.includes_phase_noise = true;
    }
    r = add_awgn(r, noise_variance, noise_rng);

    // Channel estimate.
    FrameResult out;
    TapGainMatrix g_hat;
    if (cfg.estimator == Estimator::perfect_csi) {
        g_hat = g_eff;
    } else {
        const SnapshotEstimate snap = stage1_estimate(r, pattern, L, noise_variance, cfg.threshold);
        switch (cfg.estimator) {
            case Estimator::proposed: g_hat = apply_wiener(*ctx.wiener, snap); break;
            case Estimator::bem:
                g_hat = bem_estimate(snap, f_d, cfg.oscillator_model().linewidth, ts, cfg.k_over, n);
                break;
            case Estimator::spline: g_hat = spline_estimate(snap, n); break;
            case Estimator::perfect_csi: break;
        }
        out.nmse = nmse(g_hat, g_eff);
    }

    // Detection.
    const EqualizerResult eq = lsmr_ic_equalize(r, g_hat, cfg.waveform, cfg.frame, pattern, cfg.equalizer, qam);
    const auto rx_bits = qam.demap_hard(std::span<const cd>(eq.hard.data(), static_cast<std::size_t>(eq.hard.size())));
    out.bit_errors = count_errors(tx_bits, rx_bits);
    out.bit_count = capacity;

    if (cfg.coding.enabled) {
        const auto& codec = cfg.coding.codec;
        std::vector<std::uint8_t> decoded;
        if (codec.soft) {
            const double var = std::max(eq.residual_variance, 1e-9);
            const auto llrs =
                qam.demap_soft(std::span<const cd>(eq.soft.data(), static_cast<std::size_t>(eq.soft.size())), var);
            std::vector<double> stream(coded_len);
            for (std::size_t i = 0; i < coded_len; ++i) stream[i] = llrs[perm[i]];
            decoded = viterbi_decode(stream, codec);
        } else {
            std::vector<std::uint8_t> stream(coded_len);
            for (std::size_t i = 0; i < coded_len; ++i) stream[i] = rx_bits[perm[i]];
            decoded = viterbi_decode_hard(stream, codec);
        }
        out.coded_bit_errors = count_errors(info, decoded);
        out.coded_bit_count = info.size();
    }
    return out;
}

FrameResult run_frame(const SimConfig& cfg, std::uint64_t frame_seed) {
    return run_frame(make_context(cfg), frame_seed);
}

int default_workers() {
    if (const char* env = std::getenv("SIM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

MetricsRecord run_point(const SimConfig& cfg, const RunOptions& opts, WienerCache* cache) {
    const auto start = std::chrono::steady_clock::now();
    WienerCache local(opts.wiener_cache_dir);
    const FrameContext ctx = make_context(cfg, cache ? cache : &local);

    const std::size_t frames = static_cast<std::size_t>(cfg.frames);
    std::vector<FrameResult> results(frames);
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.workers, 1)), 1, frames);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= frames) return;
            try {
                results[i] = run_frame(ctx, cfg.base_seed + i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    MetricsRecord rec;
    rec.config = cfg;
    std::uint64_t h = kFnvOffset;
    double nmse_sum = 0.0;
    for (std::size_t i = 0; i < frames; ++i) {
        const FrameResult& f = results[i];
        nmse_sum += f.nmse;
        rec.bit_errors += f.bit_errors;
        rec.bit_count += f.bit_count;
        rec.coded_bit_errors += f.coded_bit_errors;
        rec.coded_bit_count += f.coded_bit_count;
        fnv_mix(h, cfg.base_seed + i);
        fnv_mix(h, std::bit_cast<std::uint64_t>(f.nmse));
        fnv_mix(h, f.bit_errors);
        fnv_mix(h, f.bit_count);
        fnv_mix(h, f.coded_bit_errors);
        fnv_mix(h, f.coded_bit_count);
    }
    rec.frames_run = frames;
    rec.nmse_mean = nmse_sum / static_cast<double>(frames);
    rec.ber = rec.bit_count ? static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bit_count) : 0.0;
    rec.coded_ber =
        rec.coded_bit_count ? static_cast<double>(rec.coded_bit_errors) / static_cast<double>(rec.coded_bit_count) : 0.0;
    rec.digest = hex64(h);
    if (opts.timing)
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opts.keep_frames) rec.frames = std::move(results);
    return rec;
}

std::string canonical_axis_key(std::string_view key) {
    if (key == "snr") return "snr_db";
    if (key == "beta_pn") return "oscillator.beta_pn";
    if (key == "Q") return "channel.elements";
    return std::string(key);
}

SweepAxis parse_axis(std::string_view spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 >= spec.size())
        throw ConfigError("axis must look like key=a:step:b or key=v1,v2,..., got '" + std::string(spec) + "'");
    SweepAxis axis;
    axis.key = canonical_axis_key(spec.substr(0, eq));
    const std::string values(spec.substr(eq + 1));

    if (values.find(':') != std::string::npos) {
        double a = 0, step = 0, b = 0;
        char tail = 0;
        if (std::sscanf(values.c_str(), "%lf:%lf:%lf%c", &a, &step, &b, &tail) != 3)
            throw ConfigError("axis range must be start:step:stop, got '" + values + "'");
        if (!(step > 0.0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b))
            throw ConfigError("axis range needs step > 0 and stop >= start");
        const long count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 100000) throw ConfigError("axis range has too many points");
        for (long i = 0; i < count; ++i) {
            const double v = a + static_cast<double>(i) * step;
            if (v == std::round(v) && std::abs(v) < 1e15) {
                axis.values.emplace_back(static_cast<long long>(std::llround(v)));
            } else {
                axis.values.emplace_back(v);
            }
        }
        return axis;
    }

    std::size_t pos = 0;
    while (pos <= values.size()) {
        const std::size_t comma = values.find(',', pos);
        const std::string item = values.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw ConfigError("axis '" + axis.key + "' has an empty value");
        json v = json::parse(item, nullptr, false);
        if (v.is_discarded()) v = item;
        axis.values.push_back(std::move(v));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return axis;
}

std::vector<MetricsRecord> run_sweep(const SimConfig& base, const std::vector<SweepAxis>& axes,
                                     const std::vector<Waveform>& waveforms, const RunOptions& opts) {
    for (const auto& a : axes)
        if (a.values.empty()) throw ConfigError("sweep axis '" + a.key + "' has no values");
    const std::vector<Waveform> wf = waveforms.empty() ? std::vector<Waveform>{base.waveform} : waveforms;

    // Resolve every point first so configuration errors surface before any work.
    std::vector<SimConfig> points;
    std::vector<std::size_t> index(axes.size(), 0);
    while (true) {
        json doc = to_json(base);
        for (std::size_t a = 0; a < axes.size(); ++a) set_dotted(doc, axes[a].key, axes[a].values[index[a]]);
        for (Waveform w : wf) {
            SimConfig c = config_from_json(doc, base);
            c.waveform = w;
            c.validate();
            points.push_back(c);
        }
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++index[a] < axes[a].values.size()) break;
            index[a] = 0;
            if (a == 0) {
                a = axes.size();
                break;
            }
        }
        if (axes.empty() || (a == axes.size())) break;
    }

    WienerCache cache(opts.wiener_cache_dir);
    std::vector<MetricsRecord> records;
    records.reserve(points.size());
    for (const auto& p : points) records.push_back(run_point(p, opts, &cache));
    return records;
}

}  // namespace rislink
