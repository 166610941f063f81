#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "chirpcal/netsim.hpp"
#include "chirpcal/optimizer.hpp"

namespace chirpcal {

/* Fit outcome for one path capture at one temperature. */
struct PathMeasurement {
    PathId path = PathId::P3;
    double temperature = 0.0;
    double amplitude = 0.0;   // linear, > 0
    double phase = 0.0;       // rad, (-pi, pi]
    double group_delay = 0.0; // s, estimated
    double final_cost = 0.0;
    std::size_t epochs_run = 0;
    std::optional<std::size_t> converged_epoch;
    std::vector<double> error_history; // cost per epoch from the underlying fit
};

/* Amplifier transfer at one temperature, after removing the reference path
 * and the configured passive offsets. */
struct AmplifierMeasurement {
    Element element = Element::HPA;
    double temperature = 0.0;
    double gain_db = 0.0;
    double phase = 0.0; // rad
};

/* One row of the calibration table: measurement, derived factors, and the
 * compensated values they produce. */
struct CalibrationRecord {
    Element element = Element::HPA;
    double temperature = 0.0;
    double gain_db = 0.0;       // measured G
    double phase = 0.0;         // measured phi, rad
    double ref_gain_db = 0.0;   // G^r
    double ref_phase = 0.0;     // phi^r, rad
    double k_db = 0.0;          // gain factor, dB (k_db = G^r_db - G_db)
    double k_linear = 1.0;      // gain factor, linear ratio
    double theta = 0.0;         // phase factor, rad
    double comp_gain_db = 0.0;  // G + k applied
    double comp_phase = 0.0;    // wrap(phi + theta)
};

/* Per-path (gain dB, phase rad) subtracted by derive_amplifier. */
struct PathOffset {
    double gain_db = 0.0;
    double phase = 0.0;
    bool operator==(const PathOffset&) const = default;
};
using OffsetTable = std::map<PathId, PathOffset>;

enum class OffsetsMode { Zero, CharacterizeAtTref, External };

struct CalibrationOptions {
    OffsetsMode offsets_mode = OffsetsMode::CharacterizeAtTref;
    /* Nominal (datasheet) amplifier references used by CharacterizeAtTref. */
    double hpa_nominal_gain_db = 0.0;
    double hpa_nominal_phase = 0.0;
    double lna_nominal_gain_db = 0.0;
    double lna_nominal_phase = 0.0;
    OffsetTable external_offsets; // used when offsets_mode == External
    /* When set, factors are derived against these instead of the T_ref
     * measurements from the same sweep. */
    std::optional<AmplifierMeasurement> external_hpa_reference;
    std::optional<AmplifierMeasurement> external_lna_reference;
};

/* Arrival time of received relative to reference: integer-lag cross
 * correlation peak, refined by quadratic interpolation of the correlation
 * magnitude around it. */
double estimate_delay(const SampledSignal& received, const SampledSignal& reference);

/* Estimate delay against the ideal chirp, de-delay the capture (restoring the
 * samples the delay pushed out of the fixed-length window from the reference
 * shape), and fit (A, omega) on the amplitude-normalized result. */
PathMeasurement measure_path(const CaptureRecord& capture, const ChirpParams& generator,
                             const OptimizerConfig& config);

/* Sample-wise complex mean of delay-aligned pulses from one dwell. */
SampledSignal coherent_sum(std::span<const SampledSignal> pulses);

/* G = A_active/A_ref in dB minus the path's passive offset; phi likewise. */
AmplifierMeasurement derive_amplifier(const PathMeasurement& active,
                                      const PathMeasurement& reference_path,
                                      const OffsetTable& offsets);

/* Eq-style factors: k = G^r/G (linear), theta = wrap(phi^r - phi). */
CalibrationRecord derive_factors(const AmplifierMeasurement& measured,
                                 const AmplifierMeasurement& reference);

/* Full pipeline over a sweep: per temperature and element, coherent_sum ->
 * measure_path -> derive_amplifier -> derive_factors. Records are ordered by
 * (element, temperature). Throws with a gap report when any path is missing
 * at any temperature or T_ref is not in the sweep. */
std::vector<CalibrationRecord> run_calibration(const std::vector<CaptureSet>& sweep,
                                               const ChirpParams& generator,
                                               const OptimizerConfig& config, double t_ref,
                                               const CalibrationOptions& options = {});

} // namespace chirpcal
