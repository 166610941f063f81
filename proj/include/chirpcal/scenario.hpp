#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chirpcal/benchmark.hpp"
#include "chirpcal/calibration.hpp"
#include "chirpcal/netsim.hpp"
#include "chirpcal/optimizer.hpp"

namespace chirpcal {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line(line) {}
    std::size_t line;
};

/* Everything a run needs, stored in the units the config file uses (so that
 * parse -> serialize -> parse is exact). Derived model objects are built on
 * demand. */
struct ScenarioConfig {
    // [chirp]
    double amplitude = 1.0;
    double bandwidth_hz = 80.0e6;
    double center_frequency_hz = -40.0e6;
    double phase_rad = 0.0;
    double pulse_duration_s = 1.001e-6;
    double sample_rate_hz = 350.0e6;
    double pri_s = 20.0e-6;
    FreqTermConvention freq_term = FreqTermConvention::TwoPi;

    // [network]
    std::optional<double> snr_db = 30.0;
    double temperature_step_c = 0.2;
    double t_min_c = 20.0;
    double t_max_c = 30.0;
    std::uint64_t seed = 1;

    struct PathConfig {
        double passive_gain_db = 0.0;
        double passive_phase_rad = 0.0;
        double group_delay_s = 0.0;
        bool operator==(const PathConfig&) const = default;
    };
    PathConfig p1{-30.0, 0.0, 12.4e-9};
    PathConfig p2{-20.0, 0.0, 9.1e-9};
    PathConfig p3{0.0, 0.0, 6.0e-9};

    struct AmplifierConfig {
        double reference_gain_db = 0.0;
        double reference_phase_rad = 0.0;
        std::vector<std::pair<double, double>> gain_drift_db;  // (temp C, delta dB)
        std::vector<std::pair<double, double>> phase_drift_deg; // (temp C, delta deg)
        bool operator==(const AmplifierConfig&) const = default;
    };
    AmplifierConfig hpa{30.0, 0.35, {{20, 0}, {25, -0.20}, {30, -0.43}},
                        {{20, 0}, {25, -14.50}, {30, -31.73}}};
    AmplifierConfig lna{20.0, -0.20, {{20, 0}, {25, -0.26}, {30, -0.49}},
                        {{20, 0}, {25, -6.00}, {30, -12.60}}};

    // [sweep]
    double t_ref_c = 20.0;
    std::size_t pulses_per_dwell = 16;

    // [optimizer]
    OptimizerConfig optimizer;

    // [calibration]
    OffsetsMode offsets_mode = OffsetsMode::CharacterizeAtTref;
    double hpa_nominal_gain_db = 30.0;
    double hpa_nominal_phase_rad = 0.35;
    double lna_nominal_gain_db = 20.0;
    double lna_nominal_phase_rad = -0.20;
    PathOffset p1_offset; // used when offsets_mode == External
    PathOffset p2_offset;
    /* Pass/fail bounds on the compensated residual maxima (gate mode). */
    double gate_gain_db = 0.06;
    double gate_phase_deg = 2.42;

    // [benchmark]
    double bench_gain_db = -14.0;
    double bench_phase_rad = 1.45;
    std::optional<double> bench_snr_db = 30.0;
    std::size_t bench_seeds = 20;

    // [output]
    std::string out_directory = "out";
    std::vector<std::string> formats = {"csv", "bin"};

    ChirpParams chirp_params() const;
    NetworkModel network_model() const;
    CalibrationOptions calibration_options() const;
    LearningSpeedScenario bench_scenario() const;
    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

/* Parse config text (throws ConfigError with the offending line number). */
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/* Canonical serialization: every field, fixed order, full precision. */
std::string serialize_scenario(const ScenarioConfig& config);

/* FNV-1a hash of the canonical serialization, as 16 hex digits. */
std::string scenario_hash(const ScenarioConfig& config);

} // namespace chirpcal
