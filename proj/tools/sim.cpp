// sim: Monte Carlo link simulator for RIS-aided OTFS/OFDM with phase noise.
//
//   sim run --config configs/desk.toml --out results.csv
//   sim sweep --config configs/desk.toml --axis snr=0:2:20 --waveforms otfs,ofdm
//   sim validate-config --config configs/paper.toml
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rislink/harness.hpp"

using namespace rislink;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::string format = "csv";
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool timing = false;
    std::string wiener_cache;
    std::string waveforms;
};

void add_config_options(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config, "TOML or JSON config file (desk profile when omitted)");
    cmd->add_option("--override", a.overrides, "Dotted key=value, applied after the file");
}

void add_run_options(CLI::App* cmd, CommonArgs& a) {
    add_config_options(cmd, a);
    cmd->add_option("--out", a.out, "Output path (stdout when omitted)");
    cmd->add_option("--format", a.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--workers", a.workers, "Worker threads (default: SIM_WORKERS or hardware concurrency)")
        ->check(CLI::Range(1, 1024));
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&a](const std::uint64_t& s) { a.seed = s; a.seed_set = true; }, "Base seed");
    cmd->add_flag("--timing", a.timing, "Add a wall_time_s column (output is then not reproducible)");
    cmd->add_option("--wiener-cache", a.wiener_cache, "Directory for cached Wiener filter banks");
    cmd->add_option("--waveforms", a.waveforms, "Comma-separated waveforms, e.g. otfs,ofdm");
}

SimConfig resolve_config(const CommonArgs& a) {
    nlohmann::json doc = a.config.empty() ? to_json(desk_config()) : to_json(load_config(a.config));
    for (const auto& o : a.overrides) apply_override(doc, o);
    if (a.seed_set) doc["base_seed"] = a.seed;
    SimConfig cfg = config_from_json(doc, desk_config());
    cfg.validate();
    return cfg;
}

std::vector<Waveform> parse_waveforms(const std::string& list) {
    std::vector<Waveform> out;
    std::size_t pos = 0;
    while (!list.empty() && pos <= list.size()) {
        const std::size_t comma = list.find(',', pos);
        out.push_back(parse_waveform(list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void report(const std::vector<MetricsRecord>& records) {
    for (const auto& r : records) {
        std::cerr << to_string(r.config.waveform) << " " << to_string(r.config.estimator) << " snr=" << r.config.snr_db
                  << " Q=" << r.config.channel.elements << " beta=" << r.config.oscillator.beta_pn
                  << "  ber=" << r.ber;
        if (r.config.coding.enabled) std::cerr << " coded_ber=" << r.coded_ber;
        if (r.config.estimator != Estimator::perfect_csi) std::cerr << " nmse=" << r.nmse_mean;
        std::cerr << " frames=" << r.frames_run << "\n";
    }
}

int execute(const CommonArgs& a, const std::vector<std::string>& axis_specs) {
    SimConfig cfg;
    std::vector<SweepAxis> axes;
    std::vector<Waveform> waveforms;
    OutputFormat format;
    try {
        cfg = resolve_config(a);
        for (const auto& s : axis_specs) axes.push_back(parse_axis(s));
        waveforms = parse_waveforms(a.waveforms);
        format = parse_format(a.format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }

    RunOptions opts;
    opts.workers = a.workers > 0 ? a.workers : default_workers();
    opts.timing = a.timing;
    opts.wiener_cache_dir = a.wiener_cache;
    try {
        const auto records = run_sweep(cfg, axes, waveforms, opts);
        if (a.out.empty() || a.out == "-") {
            emit_results(records, format, std::cout, a.timing);
        } else {
            emit_results(records, format, a.out, a.timing);
        }
        report(records);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided OTFS/OFDM link simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run = app.add_subcommand("run", "Simulate one operating point");
    add_run_options(run, run_args);

    CommonArgs sweep_args;
    std::vector<std::string> axis_specs;
    auto* sweep = app.add_subcommand("sweep", "Simulate the Cartesian product of one or more axes");
    add_run_options(sweep, sweep_args);
    sweep->add_option("--axis", axis_specs, "key=start:step:stop or key=v1,v2 (snr, beta_pn, Q, estimator, ...)")
        ->required();

    CommonArgs check_args;
    auto* check = app.add_subcommand("validate-config", "Parse and validate a config, print it as JSON");
    add_config_options(check, check_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (*run) return execute(run_args, {});
    if (*sweep) return execute(sweep_args, axis_specs);

    try {
        const SimConfig cfg = resolve_config(check_args);
        std::cout << to_json(cfg).dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return 0;
}
