#include "chirpcal/benchmark.hpp"

#include <algorithm>
#include <cmath>

namespace chirpcal {

BenchmarkReport compare_learning_speed(const LearningSpeedScenario& scenario,
                                       std::span<const Algorithm> algorithms,
                                       std::span<const std::uint64_t> seeds) {
    if (algorithms.empty())
        throw std::invalid_argument("benchmark: no algorithms requested");
    if (seeds.empty())
        throw std::invalid_argument("benchmark: no seeds requested");
    scenario.generator.validate();
    scenario.base_config.validate();

    // One received record per seed, shared across algorithms so every
    // algorithm races on identical data.
    std::vector<SampledSignal> received;
    received.reserve(seeds.size());
    const SampledSignal clean = apply_gain_phase(generate_chirp(scenario.generator),
                                                 scenario.true_gain_db, scenario.true_phase);
    for (std::uint64_t seed : seeds)
        received.push_back(scenario.snr_db ? add_awgn(clean, *scenario.snr_db, seed) : clean);

    BenchmarkReport report;
    report.scenario = scenario.label;
    for (Algorithm alg : algorithms) {
        OptimizerConfig config = scenario.base_config;
        config.algorithm = alg;

        AlgorithmStats stats;
        stats.algorithm = alg;
        std::vector<std::size_t> converged;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            stats.runs += 1;
            LearningCurve curve;
            curve.seed = seeds[s];
            try {
                const FitResult res = fit(received[s], scenario.generator, config);
                curve.converged_epoch = res.converged_epoch;
                curve.error_history = res.error_history;
                if (res.converged_epoch) {
                    converged.push_back(*res.converged_epoch);
                    stats.converged_runs += 1;
                }
            } catch (const DivergenceError& err) {
                stats.diverged_runs += 1;
                curve.error_history.assign(1, std::nan(""));
                (void)err;
            }
            stats.curves.push_back(std::move(curve));
        }
        if (stats.diverged_runs == stats.runs)
            throw BenchmarkError("benchmark: every run diverged for algorithm " +
                                 std::string(alg == Algorithm::Adam ? "adam" : "momentum"));
        if (!converged.empty()) {
            std::sort(converged.begin(), converged.end());
            stats.min_epoch = converged.front();
            stats.max_epoch = converged.back();
            const std::size_t n = converged.size();
            stats.median_epoch =
                (n % 2 == 1)
                    ? static_cast<double>(converged[n / 2])
                    : 0.5 * (static_cast<double>(converged[n / 2 - 1]) +
                             static_cast<double>(converged[n / 2]));
        }
        report.algorithms.push_back(std::move(stats));
    }
    return report;
}

ResidualSummary summarize_residuals(std::span<const CalibrationRecord> records) {
    if (records.empty())
        throw std::invalid_argument("summarize_residuals: no records");

    ResidualSummary summary;
    for (const CalibrationRecord& rec : records) {
        ElementResiduals& el = (rec.element == Element::HPA) ? summary.hpa : summary.lna;
        el.uncomp_gain_db =
            std::max(el.uncomp_gain_db, std::fabs(rec.gain_db - rec.ref_gain_db));
        el.uncomp_phase_deg =
            std::max(el.uncomp_phase_deg,
                     rad_to_deg(circular_distance(rec.phase, rec.ref_phase)));
        el.comp_gain_db =
            std::max(el.comp_gain_db, std::fabs(rec.comp_gain_db - rec.ref_gain_db));
        el.comp_phase_deg =
            std::max(el.comp_phase_deg,
                     rad_to_deg(circular_distance(rec.comp_phase, rec.ref_phase)));
    }
    return summary;
}

} // namespace chirpcal
