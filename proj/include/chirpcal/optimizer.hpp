#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirpcal/signal.hpp"

namespace chirpcal {

enum class Algorithm { Adam, MomentumGD };

std::string to_string(Algorithm algorithm);           // "adam" / "momentum"
Algorithm algorithm_from_string(const std::string& text);

/* Standard applies the bias-corrected update theta -= a*mhat/(sqrt(vhat)+eps);
 * PaperLiteral applies theta -= a*m/sqrt(vhat+eps), the form some texts print
 * (uncorrected first moment, epsilon inside the root). */
enum class BiasCorrectionMode { Standard, PaperLiteral };

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::Adam;
    double stepsize = 1.5e-4; // alpha
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double momentum = 0.9; // mu, MomentumGD only
    std::size_t max_epochs = 60000;
    double convergence_ratio = 0.01; // "converged" when E <= ratio * E_initial
    BiasCorrectionMode bias_correction = BiasCorrectionMode::Standard;

    void validate() const;
    bool operator==(const OptimizerConfig&) const = default;
};

/* Parameter vector is (amplitude, phase); index 0 = A, index 1 = omega.
 * For MomentumGD the m array stores the velocity and v/m_hat/v_hat are unused. */
struct OptimizerState {
    double amplitude = 1.0;
    double phase = 0.0;
    std::array<double, 2> m{0.0, 0.0};
    std::array<double, 2> v{0.0, 0.0};
    std::array<double, 2> m_hat{0.0, 0.0};
    std::array<double, 2> v_hat{0.0, 0.0};
    std::size_t epoch = 0;
};

struct FitResult {
    double amplitude = 0.0;
    double phase = 0.0; // wrapped onto (-pi, pi]
    double final_cost = 0.0;
    std::vector<double> error_history; // entry 0 = cost before any update
    std::size_t epochs_run = 0;        // == error_history.size()
    std::optional<std::size_t> converged_epoch;
    Algorithm algorithm = Algorithm::Adam;
};

/* Thrown when the fit error explodes (cost above 1e6x its initial value or
 * non-finite); carries where it happened. */
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(const std::string& what, std::size_t epoch, const OptimizerState& state)
        : std::runtime_error(what), epoch(epoch), state(state) {}
    std::size_t epoch;
    OptimizerState state;
};

/* Mean squared complex distance E = (1/N) * sum |received_i - model_i|^2. */
double cost(const SampledSignal& model, const SampledSignal& received);

/* Analytic dE/dA and dE/domega at the params' current (A, omega) against the
 * received record; Kr and f are treated as known constants. The received
 * record may be a trimmed window of the pulse: the model is evaluated at the
 * received sample times, which must lie inside [0, T). */
std::array<double, 2> cost_gradient(const ChirpParams& params, const SampledSignal& received);

/* One optimizer update given the current gradient. */
void adam_step(OptimizerState& state, const std::array<double, 2>& gradient,
               const OptimizerConfig& config);
void momentum_gd_step(OptimizerState& state, const std::array<double, 2>& gradient,
                      const OptimizerConfig& config);

/* Iterate from (init_amplitude, init_phase) until max_epochs or an error
 * plateau, recording the cost per epoch. Kr, f, fs, T come from generator;
 * its amplitude/phase fields are ignored. */
FitResult fit(const SampledSignal& received, const ChirpParams& generator,
              const OptimizerConfig& config, double init_amplitude = 1.0,
              double init_phase = 0.0);

} // namespace chirpcal
