#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <tomlplusplus/toml.hpp>

#include "rislink/harness.hpp"

namespace rislink {

using nlohmann::json;

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double number_of(const json& j, const std::string& key) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError("config: '" + key + "' must be a number");
}

long long integer_of(const json& j, const std::string& key) {
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return static_cast<long long>(v);
    }
    throw ConfigError("config: '" + key + "' must be an integer");
}

int int_of(const json& j, const std::string& key) {
    const long long v = integer_of(j, key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("config: '" + key + "' out of range");
    return static_cast<int>(v);
}

std::string string_of(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError("config: '" + key + "' must be a string");
    return j.get<std::string>();
}

bool bool_of(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw ConfigError("config: '" + key + "' must be true or false");
    return j.get<bool>();
}

json number_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string octal(unsigned v) {
    std::ostringstream os;
    os << std::oct << v;
    return os.str();
}

// "133,171" -> {0133, 0171}
std::array<unsigned, 2> parse_generators(const std::string& text) {
    std::array<unsigned, 2> out{};
    std::size_t pos = 0;
    for (int i = 0; i < 2; ++i) {
        const std::size_t end = text.find(',', pos);
        const std::string part = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        if (part.empty() || part.find_first_not_of("01234567") != std::string::npos)
            throw ConfigError("config: coding.generators must be two octal numbers, e.g. \"133,171\"");
        out[static_cast<std::size_t>(i)] = static_cast<unsigned>(std::stoul(part, nullptr, 8));
        if (i == 0 && end == std::string::npos)
            throw ConfigError("config: coding.generators must be two octal numbers, e.g. \"133,171\"");
        if (i == 1 && end != std::string::npos)
            throw ConfigError("config: coding.generators must be two octal numbers, e.g. \"133,171\"");
        pos = end + 1;
    }
    return out;
}

// Recursively overlays `patch` onto `doc`, rejecting keys `doc` does not have.
void merge_known(json& doc, const json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw ConfigError("config: '" + prefix + "' must be a table");
    for (const auto& [key, value] : patch.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!doc.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        json& slot = doc[key];
        if (slot.is_object()) {
            merge_known(slot, value, path);
        } else {
            if (value.is_object()) throw ConfigError("config: '" + path + "' is not a table");
            slot = value;
        }
    }
}

json toml_to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        json out = json::object();
        for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
        return out;
    }
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a) out.push_back(toml_to_json(v));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ConfigError("config: dates and times are not supported");
}

}  // namespace

Estimator parse_estimator(std::string_view name) {
    if (name == "proposed") return Estimator::proposed;
    if (name == "bem") return Estimator::bem;
    if (name == "spline") return Estimator::spline;
    if (name == "perfect_csi") return Estimator::perfect_csi;
    throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::proposed: return "proposed";
        case Estimator::bem: return "bem";
        case Estimator::spline: return "spline";
        case Estimator::perfect_csi: return "perfect_csi";
    }
    return "proposed";
}

Waveform parse_waveform(std::string_view name) {
    if (name == "otfs") return Waveform::otfs;
    if (name == "ofdm") return Waveform::ofdm;
    throw ConfigError("unknown waveform '" + std::string(name) + "'");
}

std::string to_string(Waveform w) { return w == Waveform::otfs ? "otfs" : "ofdm"; }

double ChannelSettings::max_doppler() const {
    if (doppler_hz) return *doppler_hz;
    return velocity_kmh / 3.6 * carrier_hz / kSpeedOfLight;
}

double SimConfig::noise_variance() const {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

OscillatorModel SimConfig::oscillator_model() const {
    OscillatorModel m;
    m.kind = oscillator.kind;
    m.linewidth = oscillator.kind == OscillatorKind::none ? 0.0 : oscillator.beta_pn;
    m.loop_coefficient = oscillator.loop_coefficient;
    m.sample_period = sample_period();
    return m;
}

CorrelationModel SimConfig::correlation_model() const {
    CorrelationModel m;
    m.max_doppler = channel.max_doppler();
    m.oscillator = oscillator_model();
    m.sample_period = sample_period();
    return m;
}

int SimConfig::channel_taps() const {
    const int hop = tdl_max_tap(tdl_c(), channel.delay_spread, sample_period()) + 1;
    return 2 * hop - 1;
}

void SimConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    try {
        frame.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (!(frame.delta_f > 0.0)) fail("frame.delta_f must be > 0");
    if (channel.profile != "tdl_c") fail("channel.profile must be 'tdl_c'");
    if (!(channel.delay_spread >= 0.0)) fail("channel.delay_spread must be >= 0");
    if (channel.doppler_hz && !(*channel.doppler_hz >= 0.0 && std::isfinite(*channel.doppler_hz)))
        fail("channel.doppler_hz must be finite and >= 0");
    if (!(channel.velocity_kmh >= 0.0 && std::isfinite(channel.velocity_kmh)))
        fail("channel.velocity_kmh must be finite and >= 0");
    if (!(channel.carrier_hz > 0.0 && std::isfinite(channel.carrier_hz))) fail("channel.carrier_hz must be > 0");
    if (channel.elements < 1) fail("channel.elements must be >= 1");
    if (channel.sinusoids_per_path < 1) fail("channel.sinusoids_per_path must be >= 1");
    if (channel.mobile != "rx" && channel.mobile != "tx" && channel.mobile != "both")
        fail("channel.mobile must be 'rx', 'tx' or 'both'");
    if (channel_taps() > frame.L)
        fail("channel delay spread produces " + std::to_string(channel_taps()) + " cascade taps but frame.L is " +
             std::to_string(frame.L));
    if (!(oscillator.beta_pn >= 0.0 && std::isfinite(oscillator.beta_pn))) fail("oscillator.beta_pn must be >= 0");
    if (!(oscillator.loop_coefficient > 0.0)) fail("oscillator.loop_coefficient must be > 0");
    try {
        oscillator_model().validate();
        equalizer.validate();
        if (coding.enabled) coding.codec.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (!(k_over >= 1.0 && std::isfinite(k_over))) fail("k_over must be >= 1");
    if (!(threshold >= 0.0)) fail("threshold must be >= 0");
    if (qam_order != 4 && qam_order != 16) fail("qam_order must be 4 or 16");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) fail("snr_db must be a number");
    if (frames < 1) fail("frames must be >= 1");

    PilotPattern pattern;
    try {
        pattern = build_pilot_pattern(waveform, frame, default_pilot_power(frame.L));
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    const int n = pattern.frame_length;
    if (estimator == Estimator::bem) {
        const int q = bem_basis_count(k_over, n, channel.max_doppler(), oscillator_model().linewidth, sample_period());
        if (q > pattern.pilot_count())
            fail("BEM needs " + std::to_string(q) + " basis functions but the frame has " +
                 std::to_string(pattern.pilot_count()) + " pilots");
    }
    if (estimator == Estimator::spline && pattern.pilot_count() < 4) fail("spline estimator needs at least 4 pilots");
    if (coding.enabled) {
        const int cells = waveform == Waveform::otfs ? static_cast<int>(make_otfs_grid(frame, pattern).data_cells().size())
                                                     : static_cast<int>(make_ofdm_grid(frame).data_cells().size());
        const int capacity = cells * (qam_order == 16 ? 4 : 2);
        if (capacity / 2 - coding.codec.tail_bits() < 1) fail("frame too small for the convolutional code");
    }
}

SimConfig desk_config() { return SimConfig{}; }

SimConfig paper_config() {
    SimConfig c;
    c.frame.M = 128;
    c.frame.N = 32;
    c.frame.L = 41;
    c.frame.n_cp = 82;
    c.frame.delta_f = 60e3;
    c.channel.delay_spread = 300e-9;
    c.channel.elements = 64;
    c.frames = 100000;
    return c;
}

json to_json(const SimConfig& c) {
    json j;
    j["waveform"] = to_string(c.waveform);
    j["frame"] = {{"M", c.frame.M}, {"N", c.frame.N}, {"n_cp", c.frame.n_cp}, {"delta_f", c.frame.delta_f},
                  {"L", c.frame.L}};
    j["channel"] = {{"profile", c.channel.profile},
                    {"delay_spread", c.channel.delay_spread},
                    {"doppler_hz", c.channel.doppler_hz ? json(*c.channel.doppler_hz) : json(nullptr)},
                    {"velocity_kmh", c.channel.velocity_kmh},
                    {"carrier_hz", c.channel.carrier_hz},
                    {"elements", c.channel.elements},
                    {"ris_strategy", to_string(c.channel.ris_strategy)},
                    {"sinusoids_per_path", c.channel.sinusoids_per_path},
                    {"mobile", c.channel.mobile}};
    j["oscillator"] = {{"kind", to_string(c.oscillator.kind)},
                       {"beta_pn", c.oscillator.beta_pn},
                       {"loop_coefficient", c.oscillator.loop_coefficient}};
    j["estimator"] = to_string(c.estimator);
    j["k_over"] = c.k_over;
    j["threshold"] = c.threshold;
    j["equalizer"] = {{"ic_iterations", c.equalizer.ic_iterations},
                      {"lsmr_iterations", c.equalizer.lsmr_iterations},
                      {"damping", c.equalizer.damping}};
    j["coding"] = {{"enabled", c.coding.enabled},
                   {"constraint_length", c.coding.codec.constraint_length},
                   {"generators", octal(c.coding.codec.generators[0]) + "," + octal(c.coding.codec.generators[1])}};
    j["qam_order"] = c.qam_order;
    j["snr_db"] = number_json(c.snr_db);
    j["frames"] = c.frames;
    j["base_seed"] = c.base_seed;
    return j;
}

SimConfig config_from_json(const json& patch, const SimConfig& base) {
    json j = to_json(base);
    merge_known(j, patch, "");

    SimConfig c;
    try {
        c.waveform = parse_waveform(string_of(j["waveform"], "waveform"));
        const json& f = j["frame"];
        c.frame.M = int_of(f["M"], "frame.M");
        c.frame.N = int_of(f["N"], "frame.N");
        c.frame.n_cp = int_of(f["n_cp"], "frame.n_cp");
        c.frame.delta_f = number_of(f["delta_f"], "frame.delta_f");
        c.frame.L = int_of(f["L"], "frame.L");

        const json& ch = j["channel"];
        c.channel.profile = string_of(ch["profile"], "channel.profile");
        c.channel.delay_spread = number_of(ch["delay_spread"], "channel.delay_spread");
        if (!ch["doppler_hz"].is_null()) c.channel.doppler_hz = number_of(ch["doppler_hz"], "channel.doppler_hz");
        c.channel.velocity_kmh = number_of(ch["velocity_kmh"], "channel.velocity_kmh");
        c.channel.carrier_hz = number_of(ch["carrier_hz"], "channel.carrier_hz");
        c.channel.elements = int_of(ch["elements"], "channel.elements");
        c.channel.ris_strategy = parse_ris_strategy(string_of(ch["ris_strategy"], "channel.ris_strategy"));
        c.channel.sinusoids_per_path = int_of(ch["sinusoids_per_path"], "channel.sinusoids_per_path");
        c.channel.mobile = string_of(ch["mobile"], "channel.mobile");

        const json& o = j["oscillator"];
        c.oscillator.kind = parse_oscillator_kind(string_of(o["kind"], "oscillator.kind"));
        c.oscillator.beta_pn = number_of(o["beta_pn"], "oscillator.beta_pn");
        c.oscillator.loop_coefficient = number_of(o["loop_coefficient"], "oscillator.loop_coefficient");

        c.estimator = parse_estimator(string_of(j["estimator"], "estimator"));
        c.k_over = number_of(j["k_over"], "k_over");
        c.threshold = number_of(j["threshold"], "threshold");

        const json& e = j["equalizer"];
        c.equalizer.ic_iterations = int_of(e["ic_iterations"], "equalizer.ic_iterations");
        c.equalizer.lsmr_iterations = int_of(e["lsmr_iterations"], "equalizer.lsmr_iterations");
        c.equalizer.damping = number_of(e["damping"], "equalizer.damping");

        const json& code = j["coding"];
        c.coding.enabled = bool_of(code["enabled"], "coding.enabled");
        c.coding.codec.constraint_length = int_of(code["constraint_length"], "coding.constraint_length");
        c.coding.codec.generators = parse_generators(string_of(code["generators"], "coding.generators"));

        c.qam_order = int_of(j["qam_order"], "qam_order");
        c.snr_db = number_of(j["snr_db"], "snr_db");
        c.frames = int_of(j["frames"], "frames");
        const json& seed = j["base_seed"];
        if (seed.is_number_unsigned()) {
            c.base_seed = seed.get<std::uint64_t>();
        } else {
            const long long s = integer_of(seed, "base_seed");
            if (s < 0) throw ConfigError("config: 'base_seed' must be >= 0");
            c.base_seed = static_cast<std::uint64_t>(s);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json parse_toml(std::string_view text) {
    try {
        const toml::table table = toml::parse(text);
        return toml_to_json(table);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
}

SimConfig load_config(const std::string& path, const SimConfig& base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    json doc;
    if (is_json) {
        doc = json::parse(text, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
    } else {
        doc = parse_toml(text);
    }
    return config_from_json(doc, base);
}

void set_dotted(json& doc, std::string_view key, json value) {
    if (key.empty()) throw ConfigError("config: empty override key");
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = key.find('.', pos);
        const std::string part(key.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
        if (part.empty()) throw ConfigError("config: malformed key '" + std::string(key) + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string_view::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

void apply_override(json& doc, std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError("config: override must look like key=value, got '" + std::string(assignment) + "'");
    const std::string key = canonical_axis_key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set_dotted(doc, key, std::move(value));
}

}  // namespace rislink
