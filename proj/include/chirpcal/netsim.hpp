#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chirpcal/signal.hpp"

namespace chirpcal {

enum class PathId { P1, P2, P3 };
enum class Element { HPA, LNA };

std::string to_string(PathId id);
std::string to_string(Element e);
PathId path_from_string(const std::string& s);
Element element_from_string(const std::string& s);

/* Piecewise-linear curve of (temperature_C, delta) knots; deltas are relative
 * to the reference temperature, where the curve must evaluate to 0. */
struct DriftCurve {
    std::vector<std::pair<double, double>> knots; // sorted by temperature

    /* Linear interpolation between knots; throws outside the knot domain. */
    double at(double temperature_c) const;
    void validate() const;
};

struct AmplifierModel {
    Element element = Element::HPA;
    double reference_gain_db = 0.0;
    double reference_phase = 0.0; // rad
    DriftCurve gain_drift;        // delta dB vs temperature
    DriftCurve phase_drift;       // delta rad vs temperature

    void validate(double t_ref) const;
};

struct PathModel {
    PathId id = PathId::P3;
    double passive_gain_db = 0.0;
    double passive_phase = 0.0; // rad
    double group_delay = 0.0;   // s, >= 0
    std::optional<AmplifierModel> amplifier;
};

/* The switched calibration network: P1 routes through the HPA, P2 through the
 * LNA, P3 is the amplifier-free reference. */
struct NetworkModel {
    PathModel p1;
    PathModel p2;
    PathModel p3;
    std::optional<double> snr_db; // nullopt = noise disabled
    double temperature_step = 0.2;
    double t_min = 20.0;
    double t_max = 30.0;
    std::uint64_t seed = 1;

    const PathModel& path(PathId id) const;
    std::vector<double> temperature_grid() const;
    void validate(double t_ref, double pri) const;
};

/* True distortion applied to a capture; retained for oracle checks only and
 * never written to exported capture files. */
struct AppliedDistortion {
    double gain_db = 0.0;
    double phase = 0.0; // rad, wrapped
    double delay = 0.0; // s
};

struct CaptureRecord {
    double temperature = 0.0;
    PathId path = PathId::P3;
    std::size_t pulse_index = 0;
    SampledSignal pulse;
    std::optional<AppliedDistortion> truth;
};

/* All pulses captured at one temperature, ordered P1 block, P2 block, P3 block. */
struct CaptureSet {
    double temperature = 0.0;
    std::vector<CaptureRecord> captures;

    std::vector<const CaptureRecord*> path_captures(PathId id) const;
};

/* One pulse through one path: ideal chirp -> passive gain/phase -> amplifier
 * gain/phase at the given temperature (when present) -> group delay -> noise. */
CaptureRecord propagate(const ChirpParams& params, const PathModel& path, double temperature,
                        std::optional<double> snr_db, std::uint64_t seed,
                        std::size_t pulse_index = 0);

/* Pulses in schedule order (path, count) at a fixed temperature, with
 * per-pulse path switching. boundaries lists the index of the first pulse
 * after each path change. */
struct SwitchingCapture {
    std::vector<CaptureRecord> pulses;
    std::vector<std::size_t> boundaries;
};
SwitchingCapture
capture_switching_sequence(const ChirpParams& params, const NetworkModel& model,
                           const std::vector<std::pair<PathId, std::size_t>>& schedule,
                           double temperature);

/* Step the network over its temperature grid, capturing pulses_per_path
 * pulses on each of P1/P2/P3 at every temperature. */
std::vector<CaptureSet> thermal_sweep(const ChirpParams& params, const NetworkModel& model,
                                      std::size_t pulses_per_path);

} // namespace chirpcal
