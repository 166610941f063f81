/* End-to-end tests for the chirpcal command-line tool. Invoked with the
 * binary's path as argv[1]; prints one ok/not-ok line per check and exits
 * with the number of failures. */

#include "chirpcal/calibration.hpp"
#include "chirpcal/io.hpp"
#include "chirpcal/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace chirpcal;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& name) {
    std::printf("%s - %s\n", ok ? "ok" : "not ok", name.c_str());
    if (!ok)
        ++failures;
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

struct RunResult {
    int code = -1;
    std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& bin, const std::string& args, const fs::path& scratch) {
    static int counter = 0;
    const fs::path log = scratch / ("run_" + std::to_string(counter++) + ".log");
    const std::string cmd = "'" + bin + "' " + args + " >" + quoted(log) + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    if (status != -1 && WIFEXITED(status))
        result.code = WEXITSTATUS(status);
    std::ifstream in(log, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <chirpcal-binary>\n");
        return 1;
    }
    const std::string bin = argv[1];

    const fs::path root =
        fs::temp_directory_path() / ("chirpcal_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);

    /* ---- global flags ---- */

    RunResult r = run_cli(bin, "--version", root);
    check(r.code == 0 && contains(r.output, kToolVersion), "--version prints the tool version");

    r = run_cli(bin, "", root);
    check(r.code == 1 && contains(r.output, "simulate") && contains(r.output, "calibrate"),
          "bare invocation prints help and exits 1");

    r = run_cli(bin, "--print-default-config", root);
    bool default_ok = (r.code == 0);
    if (default_ok) {
        try {
            default_ok = (parse_scenario(r.output) == ScenarioConfig{});
        } catch (const std::exception&) {
            default_ok = false;
        }
    }
    check(default_ok, "--print-default-config emits the parseable built-in scenario");

    /* ---- simulate ---- */

    ScenarioConfig small;
    small.t_max_c = 21.0; // six dwell temperatures at the default 0.2 C step
    small.pulses_per_dwell = 2;
    small.snr_db = std::nullopt;
    small.formats = {"bin"};
    const fs::path cfg = root / "small.cfg";
    dump_text(cfg, serialize_scenario(small));

    const fs::path dir_a = root / "a";
    r = run_cli(bin, "simulate --config " + quoted(cfg) + " --out-dir " + quoted(dir_a), root);
    check(r.code == 0, "simulate exits 0");
    check(fs::exists(dir_a / "captures.bin") && fs::exists(dir_a / "scenario.cfg") &&
              fs::exists(dir_a / "manifest.json"),
          "simulate writes captures, the effective config, and the manifest");

    bool manifest_ok = false;
    try {
        const Manifest m = read_manifest_json(dir_a / "manifest.json");
        manifest_ok = m.temperature_count == 6 && m.pulses_per_dwell == 2 &&
                      m.sample_rate_hz == small.sample_rate_hz && m.seed == small.seed &&
                      m.config_hash == scenario_hash(small) && m.captures.size() == 1 &&
                      m.captures[0].file == "captures.bin" && m.captures[0].format == "bin";
    } catch (const std::exception&) {
    }
    check(manifest_ok, "manifest records the sweep shape and the config hash");

    const fs::path dir_b = root / "b";
    r = run_cli(bin, "simulate --config " + quoted(cfg) + " --out-dir " + quoted(dir_b), root);
    check(r.code == 0 && slurp(dir_a / "captures.bin") == slurp(dir_b / "captures.bin") &&
              slurp(dir_a / "scenario.cfg") == slurp(dir_b / "scenario.cfg") &&
              slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"),
          "repeated simulate runs are byte-identical");

    const fs::path dir_seed = root / "seeded";
    r = run_cli(bin,
                "simulate --config " + quoted(cfg) + " --seed 99 --out-dir " + quoted(dir_seed),
                root);
    bool seed_ok = (r.code == 0);
    if (seed_ok) {
        try {
            seed_ok = read_manifest_json(dir_seed / "manifest.json").seed == 99;
        } catch (const std::exception&) {
            seed_ok = false;
        }
    }
    check(seed_ok, "--seed overrides the scenario seed in the manifest");

    /* ---- calibrate ---- */

    r = run_cli(bin, "calibrate --manifest " + quoted(dir_a / "manifest.json") + " --gate",
                root);
    check(r.code == 0 && contains(r.output, "PASS"),
          "calibrate --gate passes on a noiseless sweep");
    check(fs::exists(dir_a / "calibration.csv") && fs::exists(dir_a / "calibration.json") &&
              fs::exists(dir_a / "residual_summary.csv"),
          "calibrate writes the calibration table, JSON dump, and residual summary");

    bool table_ok = false;
    try {
        const std::vector<CaptureSet> sweep = read_captures_bin(dir_a / "captures.bin");
        const std::vector<CalibrationRecord> expected =
            run_calibration(sweep, small.chirp_params(), small.optimizer, small.t_ref_c,
                            small.calibration_options());
        const std::vector<CalibrationRecord> written =
            read_calibration_csv(dir_a / "calibration.csv");
        table_ok = written.size() == expected.size() && expected.size() == 12;
        for (std::size_t i = 0; table_ok && i < written.size(); ++i) {
            table_ok = written[i].element == expected[i].element &&
                       written[i].temperature == expected[i].temperature &&
                       written[i].gain_db == expected[i].gain_db &&
                       written[i].k_db == expected[i].k_db &&
                       written[i].comp_gain_db == expected[i].comp_gain_db &&
                       circular_distance(written[i].comp_phase, expected[i].comp_phase) < 1e-13;
        }
    } catch (const std::exception&) {
    }
    check(table_ok, "written calibration table matches an in-process run on the same captures");

    // A 3-temperature configuration used by the output-directory test below.
    ScenarioConfig tiny = small;
    tiny.t_max_c = 20.4;
    tiny.pulses_per_dwell = 1;
    const fs::path tiny_cfg = root / "tiny.cfg";
    dump_text(tiny_cfg, serialize_scenario(tiny));

    // An edited config invalidates the recorded hash.
    const std::string original = slurp(dir_b / "scenario.cfg");
    const std::string edited = [&] {
        std::string text = original;
        const std::string::size_type pos = text.find("seed = 1");
        text.replace(pos, 8, "seed = 7");
        return text;
    }();
    dump_text(dir_b / "scenario.cfg", edited);
    r = run_cli(bin, "calibrate --manifest " + quoted(dir_b / "manifest.json"), root);
    check(r.code == 1 && contains(r.output, "config hash mismatch"),
          "calibrate rejects a manifest whose config was edited");

    // Captures missing a path at one temperature are reported by name.
    const fs::path dir_e = root / "gap";
    fs::create_directories(dir_e);
    dump_text(dir_e / "scenario.cfg", original);
    dump_text(dir_e / "manifest.json", slurp(dir_a / "manifest.json"));
    {
        std::vector<CaptureSet> sweep = read_captures_bin(dir_a / "captures.bin");
        for (CaptureSet& set : sweep) {
            if (std::fabs(set.temperature - 20.2) < 1e-9) {
                std::erase_if(set.captures,
                              [](const CaptureRecord& rec) { return rec.path == PathId::P3; });
            }
        }
        write_captures_bin(dir_e / "captures.bin", sweep);
    }
    r = run_cli(bin, "calibrate --manifest " + quoted(dir_e / "manifest.json"), root);
    check(r.code == 1 && contains(r.output, "P3") && contains(r.output, "20.2"),
          "calibrate names the path and temperature of a capture gap");

    const fs::path dir_empty = root / "empty";
    fs::create_directories(dir_empty);
    r = run_cli(bin, "calibrate --out-dir " + quoted(dir_empty), root);
    check(r.code == 1 && contains(r.output, "error"),
          "calibrate without a manifest anywhere exits 1");

    /* ---- bench ---- */

    const fs::path dir_bench = root / "bench";
    r = run_cli(bin, "bench --seeds 1 --algorithms adam --out-dir " + quoted(dir_bench), root);
    bool bench_ok = r.code == 0 && contains(r.output, "adam") &&
                    fs::exists(dir_bench / "bench_report.json") &&
                    fs::exists(dir_bench / "learning_curves.csv");
    if (bench_ok) {
        try {
            const nlohmann::json j =
                nlohmann::json::parse(slurp(dir_bench / "bench_report.json"));
            bench_ok = j.at("algorithms").size() == 1 &&
                       j.at("algorithms").at(0).at("algorithm").get<std::string>() == "adam" &&
                       j.at("algorithms").at(0).at("runs").get<int>() == 1;
        } catch (const std::exception&) {
            bench_ok = false;
        }
    }
    check(bench_ok, "bench runs one adam seed and writes the report files");

    r = run_cli(bin, "bench --algorithms sgd --out-dir " + quoted(dir_bench), root);
    check(r.code == 1 && contains(r.output, "error"), "bench rejects an unknown algorithm");

    /* ---- fit ---- */

    const ScenarioConfig defaults;
    const ChirpParams params = defaults.chirp_params();
    const SampledSignal distorted = apply_gain_phase(generate_chirp(params), 2.0, 0.7);
    const fs::path sig_csv = root / "pulse.csv";
    write_signal_csv(sig_csv, distorted);

    const fs::path dir_fit = root / "fit";
    r = run_cli(bin, "fit " + quoted(sig_csv) + " --out-dir " + quoted(dir_fit), root);
    bool fit_ok = r.code == 0 && fs::exists(dir_fit / "fit.json") &&
                  fs::exists(dir_fit / "fit_history.csv");
    if (fit_ok) {
        try {
            CaptureRecord capture;
            capture.pulse = read_signal_csv(sig_csv, params.sample_rate);
            const PathMeasurement expected =
                measure_path(capture, params, defaults.optimizer);
            const nlohmann::json j = nlohmann::json::parse(slurp(dir_fit / "fit.json"));
            fit_ok = std::fabs(j.at("amplitude").get<double>() - expected.amplitude) <=
                         1e-12 * expected.amplitude &&
                     std::fabs(j.at("phase_rad").get<double>() - expected.phase) <= 1e-12 &&
                     std::fabs(j.at("amplitude").get<double>() - db_to_linear(2.0)) <=
                         1e-3 * db_to_linear(2.0) &&
                     circular_distance(j.at("phase_rad").get<double>(), 0.7) <= 2e-3 &&
                     std::fabs(j.at("group_delay_s").get<double>()) < 1e-12 &&
                     read_history_csv(dir_fit / "fit_history.csv") == expected.error_history;
        } catch (const std::exception&) {
            fit_ok = false;
        }
    }
    check(fit_ok, "fit recovers the applied gain/phase and matches the library pipeline");

    const fs::path empty_csv = root / "empty.csv";
    dump_text(empty_csv, "index,t_seconds,i,q\n");
    r = run_cli(bin, "fit " + quoted(empty_csv), root);
    check(r.code == 1 && contains(r.output, "error"), "fit rejects a signal file with no rows");

    r = run_cli(bin, "fit " + quoted(root / "absent.csv"), root);
    check(r.code != 0, "fit rejects a missing signal file");

    /* ---- output directory resolution ---- */

    const fs::path dir_env = root / "env";
    ::setenv("CHIRPCAL_OUT_DIR", dir_env.c_str(), 1);
    r = run_cli(bin, "simulate --config " + quoted(tiny_cfg), root);
    ::unsetenv("CHIRPCAL_OUT_DIR");
    check(r.code == 0 && fs::exists(dir_env / "manifest.json"),
          "CHIRPCAL_OUT_DIR supplies the output directory when no flag is given");

    fs::remove_all(root);
    if (failures == 0)
        std::printf("all cli tests passed\n");
    else
        std::printf("%d cli test(s) failed\n", failures);
    return failures;
}
