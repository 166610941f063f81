#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chirpcal/benchmark.hpp"
#include "chirpcal/calibration.hpp"
#include "chirpcal/io.hpp"
#include "chirpcal/netsim.hpp"
#include "chirpcal/scenario.hpp"

namespace fs = std::filesystem;
using namespace chirpcal;

namespace {

/* Flag state shared by every subcommand; empty/unset means "use the config". */
struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool paper_literal_phase = false;
    std::string bias_correction;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Scenario config file (default: built-in)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Override the scenario seed");
    cmd->add_option("--out-dir", opts.out_dir,
                    "Output directory (default: $CHIRPCAL_OUT_DIR, then the config's)");
    cmd->add_flag("--paper-literal-phase", opts.paper_literal_phase,
                  "Generate chirps with the pi*f*t frequency term instead of 2*pi*f*t");
    cmd->add_option("--bias-correction", opts.bias_correction,
                    "Adam update form: standard | paper")
        ->check(CLI::IsMember({"standard", "paper"}));
}

/* Load the scenario (or defaults) and fold the command-line overrides in; the
 * result is the effective config every output is derived from. */
ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig config =
        opts.config_path.empty() ? ScenarioConfig{} : load_scenario_file(opts.config_path);
    if (opts.seed)
        config.seed = *opts.seed;
    if (opts.paper_literal_phase)
        config.freq_term = FreqTermConvention::PaperPi;
    if (opts.bias_correction == "standard")
        config.optimizer.bias_correction = BiasCorrectionMode::Standard;
    else if (opts.bias_correction == "paper")
        config.optimizer.bias_correction = BiasCorrectionMode::PaperLiteral;
    config.validate();
    return config;
}

fs::path resolve_out_dir(const CommonOpts& opts, const ScenarioConfig& config) {
    if (!opts.out_dir.empty())
        return opts.out_dir;
    if (const char* env = std::getenv("CHIRPCAL_OUT_DIR"); env && *env)
        return env;
    return config.out_directory;
}

void write_text_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing: " + file.string());
    out << text;
    out.flush();
    if (!out)
        throw IoError("write failed: " + file.string());
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/* ---- simulate ------------------------------------------------------------ */

int cmd_simulate(const CommonOpts& opts, const std::vector<std::string>& formats) {
    ScenarioConfig config = load_config(opts);
    if (!formats.empty())
        config.formats = formats;
    config.validate();

    const fs::path out = resolve_out_dir(opts, config);
    fs::create_directories(out);

    const ChirpParams params = config.chirp_params();
    const NetworkModel model = config.network_model();
    const std::vector<CaptureSet> sweep = thermal_sweep(params, model, config.pulses_per_dwell);

    write_text_file(out / "scenario.cfg", serialize_scenario(config));

    Manifest manifest;
    manifest.config_file = "scenario.cfg";
    manifest.config_hash = scenario_hash(config);
    manifest.seed = config.seed;
    manifest.sample_rate_hz = config.sample_rate_hz;
    manifest.temperature_count = sweep.size();
    manifest.pulses_per_dwell = config.pulses_per_dwell;

    for (const std::string& format : config.formats) {
        const std::string name = "captures." + format;
        if (format == "csv")
            write_captures_csv(out / name, sweep);
        else if (format == "bin")
            write_captures_bin(out / name, sweep);
        else
            write_captures_json(out / name, sweep);
        manifest.captures.push_back({name, format});
        std::cout << "wrote " << (out / name).string() << "\n";
    }
    write_manifest_json(out / "manifest.json", manifest);
    std::cout << "wrote " << (out / "scenario.cfg").string() << "\n";
    std::cout << "wrote " << (out / "manifest.json").string() << "\n";
    std::cout << sweep.size() << " temperatures x 3 paths x " << config.pulses_per_dwell
              << " pulses (config " << manifest.config_hash << ")\n";
    return 0;
}

/* ---- calibrate ------------------------------------------------------------ */

std::vector<CaptureSet> load_captures(const fs::path& base, const Manifest& manifest) {
    /* Prefer the lossless-and-compact order: bin, csv, json. */
    const char* preference[] = {"bin", "csv", "json"};
    for (const char* format : preference) {
        for (const CaptureFileEntry& entry : manifest.captures) {
            if (entry.format != format)
                continue;
            const fs::path file = base / entry.file;
            if (entry.format == "bin")
                return read_captures_bin(file);
            if (entry.format == "csv")
                return read_captures_csv(file, manifest.sample_rate_hz);
            return read_captures_json(file);
        }
    }
    throw IoError("manifest lists no capture files");
}

int cmd_calibrate(const CommonOpts& opts, const std::string& manifest_path, bool gate) {
    fs::path manifest_file;
    if (!manifest_path.empty()) {
        manifest_file = manifest_path;
    } else {
        /* No explicit manifest: look in the usual output directory. */
        ScenarioConfig defaults =
            opts.config_path.empty() ? ScenarioConfig{} : load_scenario_file(opts.config_path);
        manifest_file = resolve_out_dir(opts, defaults) / "manifest.json";
    }
    const Manifest manifest = read_manifest_json(manifest_file);
    const fs::path base = manifest_file.parent_path();

    CommonOpts effective = opts;
    if (effective.config_path.empty()) {
        effective.config_path = (base / manifest.config_file).string();
        const ScenarioConfig recorded = load_scenario_file(effective.config_path);
        if (scenario_hash(recorded) != manifest.config_hash)
            throw IoError("config hash mismatch: " + effective.config_path +
                          " does not match the manifest (was the file edited?)");
    }
    const ScenarioConfig config = load_config(effective);

    const std::vector<CaptureSet> sweep = load_captures(base, manifest);
    const std::vector<CalibrationRecord> records =
        run_calibration(sweep, config.chirp_params(), config.optimizer, config.t_ref_c,
                        config.calibration_options());
    const ResidualSummary summary = summarize_residuals(records);

    const fs::path out = opts.out_dir.empty() ? base : fs::path(opts.out_dir);
    fs::create_directories(out);
    write_calibration_csv(out / "calibration.csv", records);
    write_calibration_json(out / "calibration.json", records, summary);
    write_residual_summary_csv(out / "residual_summary.csv", summary);

    std::cout << "calibration summary over " << sweep.size()
              << " temperatures (max |residual| vs reference):\n";
    std::cout << "element  uncomp_gain_dB  uncomp_phase_deg  comp_gain_dB  comp_phase_deg\n";
    auto row = [](const char* name, const ElementResiduals& r) {
        std::printf("%-7s  %14.4f  %16.4f  %12.4f  %14.4f\n", name, r.uncomp_gain_db,
                    r.uncomp_phase_deg, r.comp_gain_db, r.comp_phase_deg);
    };
    row("HPA", summary.hpa);
    row("LNA", summary.lna);
    std::cout << "wrote " << (out / "calibration.csv").string() << "\n";
    std::cout << "wrote " << (out / "calibration.json").string() << "\n";
    std::cout << "wrote " << (out / "residual_summary.csv").string() << "\n";

    if (gate) {
        const double worst_gain = std::max(summary.hpa.comp_gain_db, summary.lna.comp_gain_db);
        const double worst_phase =
            std::max(summary.hpa.comp_phase_deg, summary.lna.comp_phase_deg);
        const bool pass =
            worst_gain <= config.gate_gain_db && worst_phase <= config.gate_phase_deg;
        std::cout << "gate: comp residuals " << fmt("%.4f", worst_gain) << " dB / "
                  << fmt("%.4f", worst_phase) << " deg vs limits "
                  << fmt("%.4f", config.gate_gain_db) << " dB / "
                  << fmt("%.4f", config.gate_phase_deg) << " deg -> "
                  << (pass ? "PASS" : "FAIL") << "\n";
        if (!pass)
            return 2;
    }
    return 0;
}

/* ---- bench ----------------------------------------------------------------- */

int cmd_bench(const CommonOpts& opts, const std::string& algorithms_arg,
              std::optional<std::size_t> seed_count) {
    const ScenarioConfig config = load_config(opts);
    const fs::path out = resolve_out_dir(opts, config);
    fs::create_directories(out);

    std::vector<Algorithm> algorithms;
    {
        std::string item;
        std::stringstream ss(algorithms_arg);
        while (std::getline(ss, item, ','))
            algorithms.push_back(algorithm_from_string(item));
    }
    if (algorithms.empty())
        throw std::invalid_argument("--algorithms must name at least one algorithm");

    const std::size_t count = seed_count.value_or(config.bench_seeds);
    if (count == 0)
        throw std::invalid_argument("--seeds must be > 0");
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i)
        seeds[i] = config.seed + i;

    const LearningSpeedScenario scenario = config.bench_scenario();
    const BenchmarkReport report = compare_learning_speed(scenario, algorithms, seeds);

    write_benchmark_json(out / "bench_report.json", report);
    write_learning_curves_csv(out / "learning_curves.csv", report);

    std::cout << "benchmark " << report.scenario << ": gain "
              << fmt("%.4g", config.bench_gain_db) << " dB, phase "
              << fmt("%.4g", config.bench_phase_rad) << " rad, snr "
              << (config.bench_snr_db ? fmt("%.4g", *config.bench_snr_db) + " dB" : "off")
              << ", " << count << " seed" << (count == 1 ? "" : "s") << "\n";
    for (const AlgorithmStats& stats : report.algorithms) {
        std::cout << "  " << to_string(stats.algorithm) << ": " << stats.converged_runs << "/"
                  << stats.runs << " converged";
        if (stats.median_epoch)
            std::cout << ", epochs min " << *stats.min_epoch << " median "
                      << fmt("%.1f", *stats.median_epoch) << " max " << *stats.max_epoch;
        if (stats.diverged_runs)
            std::cout << ", " << stats.diverged_runs << " diverged";
        std::cout << "\n";
    }
    std::cout << "wrote " << (out / "bench_report.json").string() << "\n";
    std::cout << "wrote " << (out / "learning_curves.csv").string() << "\n";
    return 0;
}

/* ---- fit ------------------------------------------------------------------ */

int cmd_fit(const CommonOpts& opts, const std::string& signal_path,
            const std::string& algorithm_arg) {
    ScenarioConfig config = load_config(opts);
    if (!algorithm_arg.empty())
        config.optimizer.algorithm = algorithm_from_string(algorithm_arg);
    const fs::path out = resolve_out_dir(opts, config);
    fs::create_directories(out);

    const ChirpParams params = config.chirp_params();
    const SampledSignal signal = read_signal_csv(signal_path, params.sample_rate);

    CaptureRecord capture;
    capture.pulse = signal;
    const PathMeasurement m = measure_path(capture, params, config.optimizer);

    FitResult result;
    result.amplitude = m.amplitude;
    result.phase = m.phase;
    result.final_cost = m.final_cost;
    result.error_history = m.error_history;
    result.epochs_run = m.epochs_run;
    result.converged_epoch = m.converged_epoch;
    result.algorithm = config.optimizer.algorithm;

    write_fit_json(out / "fit.json", result, m.group_delay);
    write_history_csv(out / "fit_history.csv", result.error_history);

    std::cout << "amplitude  " << fmt("%.8g", m.amplitude) << "  ("
              << fmt("%.6g", linear_to_db(m.amplitude)) << " dB)\n";
    std::cout << "phase      " << fmt("%.8g", rad_to_deg(m.phase)) << " deg\n";
    std::cout << "delay      " << fmt("%.6g", m.group_delay * 1e9) << " ns\n";
    std::cout << "final cost " << fmt("%.8g", m.final_cost) << " after " << m.epochs_run
              << " epochs";
    if (m.converged_epoch)
        std::cout << " (hit 1% of the initial error at epoch " << *m.converged_epoch << ")";
    std::cout << "\n";
    std::cout << "wrote " << (out / "fit.json").string() << "\n";
    std::cout << "wrote " << (out / "fit_history.csv").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated switched-network chirp calibration: pulse capture, "
                 "amplitude/phase fitting, thermal calibration factors, and optimizer "
                 "benchmarks"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(0, 1);

    bool print_default = false;
    app.add_flag("--print-default-config", print_default,
                 "Print the built-in scenario config and exit");

    CommonOpts sim_opts, cal_opts, bench_opts, fit_opts;
    std::vector<std::string> sim_formats;
    std::string cal_manifest;
    bool cal_gate = false;
    std::string bench_algorithms = "adam,momentum";
    std::optional<std::size_t> bench_seed_count;
    std::string fit_signal, fit_algorithm;

    CLI::App* sim = app.add_subcommand("simulate", "Run the thermal sweep and write captures");
    add_common_flags(sim, sim_opts);
    sim->add_option("--format", sim_formats, "Capture formats to write (csv, json, bin)")
        ->check(CLI::IsMember({"csv", "json", "bin"}));

    CLI::App* cal = app.add_subcommand(
        "calibrate", "Fit captured pulses and derive gain/phase calibration factors");
    add_common_flags(cal, cal_opts);
    cal->add_option("--manifest", cal_manifest,
                    "Capture manifest (default: <out-dir>/manifest.json)")
        ->check(CLI::ExistingFile);
    cal->add_flag("--gate", cal_gate,
                  "Exit nonzero unless compensated residuals stay inside the configured "
                  "gate thresholds");

    CLI::App* bench =
        app.add_subcommand("bench", "Compare optimizer convergence speed over many seeds");
    add_common_flags(bench, bench_opts);
    bench->add_option("--algorithms", bench_algorithms,
                      "Comma-separated list drawn from: adam, momentum");
    bench->add_option("--seeds", bench_seed_count, "Number of seeds to run");

    CLI::App* fitc = app.add_subcommand("fit", "Fit amplitude/phase of one recorded pulse");
    add_common_flags(fitc, fit_opts);
    fitc->add_option("signal", fit_signal, "Signal CSV (index,t_seconds,i,q)")
        ->required()
        ->check(CLI::ExistingFile);
    fitc->add_option("--algorithm", fit_algorithm, "adam | momentum")
        ->check(CLI::IsMember({"adam", "momentum"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_default) {
            std::cout << serialize_scenario(ScenarioConfig{});
            return 0;
        }
        if (sim->parsed())
            return cmd_simulate(sim_opts, sim_formats);
        if (cal->parsed())
            return cmd_calibrate(cal_opts, cal_manifest, cal_gate);
        if (bench->parsed())
            return cmd_bench(bench_opts, bench_algorithms, bench_seed_count);
        if (fitc->parsed())
            return cmd_fit(fit_opts, fit_signal, fit_algorithm);
        std::cout << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "chirpcal: error: " << e.what() << "\n";
        return 1;
    }
}
