#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chirpcal/calibration.hpp"
#include "chirpcal/optimizer.hpp"

namespace chirpcal {

/* The synthetic fit both algorithms race on: a chirp through a fixed complex
 * distortion, with optional per-seed noise. */
struct LearningSpeedScenario {
    ChirpParams generator;
    double true_gain_db = 0.0;
    double true_phase = 0.0;              // rad
    std::optional<double> snr_db = 30.0;  // nullopt = noiseless
    OptimizerConfig base_config;          // algorithm field overridden per run
    std::string label = "default";
};

struct LearningCurve {
    std::uint64_t seed = 0;
    std::optional<std::size_t> converged_epoch;
    std::vector<double> error_history;
};

struct AlgorithmStats {
    Algorithm algorithm = Algorithm::Adam;
    std::size_t runs = 0;
    std::size_t converged_runs = 0;
    std::size_t diverged_runs = 0;
    /* Over converged runs only; absent when none converged. */
    std::optional<std::size_t> min_epoch;
    std::optional<double> median_epoch;
    std::optional<std::size_t> max_epoch;
    std::vector<LearningCurve> curves;
};

/* Residual maxima across a calibration sweep: raw measurement vs reference,
 * and compensated vs reference. */
struct ElementResiduals {
    double uncomp_gain_db = 0.0;
    double uncomp_phase_deg = 0.0;
    double comp_gain_db = 0.0;
    double comp_phase_deg = 0.0;
};
struct ResidualSummary {
    ElementResiduals hpa;
    ElementResiduals lna;
};

struct BenchmarkReport {
    std::string scenario;
    std::vector<AlgorithmStats> algorithms;
    std::optional<ResidualSummary> residuals;
};

class BenchmarkError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/* Run identical fits per seed for every algorithm and gather convergence
 * statistics. Throws BenchmarkError naming the algorithm if all of its runs
 * diverge. */
BenchmarkReport compare_learning_speed(const LearningSpeedScenario& scenario,
                                       std::span<const Algorithm> algorithms,
                                       std::span<const std::uint64_t> seeds);

/* Max |measured - reference| and |compensated - reference| per element over a
 * calibration record set (meaningful when it spans several temperatures). */
ResidualSummary summarize_residuals(std::span<const CalibrationRecord> records);

} // namespace chirpcal
