#include "chirpcal/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chirpcal {

std::string to_string(PathId id) {
    switch (id) {
    case PathId::P1: return "P1";
    case PathId::P2: return "P2";
    case PathId::P3: return "P3";
    }
    throw std::logic_error("unknown PathId");
}

std::string to_string(Element e) {
    return e == Element::HPA ? "HPA" : "LNA";
}

PathId path_from_string(const std::string& s) {
    if (s == "P1") return PathId::P1;
    if (s == "P2") return PathId::P2;
    if (s == "P3") return PathId::P3;
    throw std::invalid_argument("unknown path name: " + s);
}

Element element_from_string(const std::string& s) {
    if (s == "HPA") return Element::HPA;
    if (s == "LNA") return Element::LNA;
    throw std::invalid_argument("unknown element name: " + s);
}

void DriftCurve::validate() const {
    if (knots.size() < 2)
        throw std::invalid_argument("drift curve: need at least 2 knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i].first > knots[i - 1].first))
            throw std::invalid_argument("drift curve: knot temperatures must be increasing");
}

double DriftCurve::at(double temperature_c) const {
    validate();
    if (temperature_c < knots.front().first - 1e-9 ||
        temperature_c > knots.back().first + 1e-9)
        throw std::invalid_argument("drift curve: temperature outside knot domain");
    temperature_c = std::clamp(temperature_c, knots.front().first, knots.back().first);
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (temperature_c <= knots[i].first) {
            const auto& [t0, v0] = knots[i - 1];
            const auto& [t1, v1] = knots[i];
            return v0 + (v1 - v0) * (temperature_c - t0) / (t1 - t0);
        }
    }
    return knots.back().second;
}

void AmplifierModel::validate(double t_ref) const {
    gain_drift.validate();
    phase_drift.validate();
    if (std::fabs(gain_drift.at(t_ref)) > 1e-12 || std::fabs(phase_drift.at(t_ref)) > 1e-12)
        throw std::invalid_argument("amplifier: drift must be 0 at the reference temperature");
}

const PathModel& NetworkModel::path(PathId id) const {
    switch (id) {
    case PathId::P1: return p1;
    case PathId::P2: return p2;
    case PathId::P3: return p3;
    }
    throw std::logic_error("unknown PathId");
}

std::vector<double> NetworkModel::temperature_grid() const {
    if (!(temperature_step > 0.0))
        throw std::invalid_argument("network: temperature_step must be > 0");
    if (t_max < t_min)
        throw std::invalid_argument("network: t_max below t_min");
    const auto count =
        static_cast<std::size_t>(std::floor((t_max - t_min) / temperature_step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k)
        grid[k] = t_min + static_cast<double>(k) * temperature_step;
    return grid;
}

void NetworkModel::validate(double t_ref, double pri) const {
    if (p1.id != PathId::P1 || p2.id != PathId::P2 || p3.id != PathId::P3)
        throw std::invalid_argument("network: paths must be labeled P1, P2, P3");
    if (!p1.amplifier || p1.amplifier->element != Element::HPA)
        throw std::invalid_argument("network: P1 must route through the HPA");
    if (!p2.amplifier || p2.amplifier->element != Element::LNA)
        throw std::invalid_argument("network: P2 must route through the LNA");
    if (p3.amplifier)
        throw std::invalid_argument("network: P3 must have no amplifier");
    for (const PathModel* p : {&p1, &p2, &p3}) {
        if (!(p->group_delay >= 0.0) || p->group_delay >= pri)
            throw std::invalid_argument("network: group delay must be in [0, PRI)");
        if (p->amplifier)
            p->amplifier->validate(t_ref);
    }
    if (t_ref < t_min - 1e-9 || t_ref > t_max + 1e-9)
        throw std::invalid_argument("network: reference temperature outside sweep range");
    (void)temperature_grid();
}

CaptureRecord propagate(const ChirpParams& params, const PathModel& path, double temperature,
                        std::optional<double> snr_db, std::uint64_t seed,
                        std::size_t pulse_index) {
    double gain_db = path.passive_gain_db;
    double phase = path.passive_phase;
    if (path.amplifier) {
        const AmplifierModel& amp = *path.amplifier;
        gain_db += amp.reference_gain_db + amp.gain_drift.at(temperature);
        phase += amp.reference_phase + amp.phase_drift.at(temperature);
    }

    SampledSignal sig = generate_chirp(params);
    sig = apply_gain_phase(sig, gain_db, phase);
    if (path.group_delay != 0.0)
        sig = apply_delay(sig, path.group_delay);
    if (snr_db)
        sig = add_awgn(sig, *snr_db, seed);

    CaptureRecord rec;
    rec.temperature = temperature;
    rec.path = path.id;
    rec.pulse_index = pulse_index;
    rec.pulse = std::move(sig);
    rec.truth = AppliedDistortion{gain_db, wrap_phase(phase), path.group_delay};
    return rec;
}

std::vector<const CaptureRecord*> CaptureSet::path_captures(PathId id) const {
    std::vector<const CaptureRecord*> out;
    for (const CaptureRecord& rec : captures)
        if (rec.path == id)
            out.push_back(&rec);
    return out;
}

SwitchingCapture
capture_switching_sequence(const ChirpParams& params, const NetworkModel& model,
                           const std::vector<std::pair<PathId, std::size_t>>& schedule,
                           double temperature) {
    if (schedule.empty())
        throw std::invalid_argument("switching sequence: empty schedule");
    SwitchingCapture out;
    std::size_t pulse_index = 0;
    for (const auto& [id, count] : schedule) {
        if (count == 0)
            throw std::invalid_argument("switching sequence: zero-pulse schedule entry");
        for (std::size_t i = 0; i < count; ++i, ++pulse_index) {
            if (pulse_index > 0 && out.pulses.back().path != id)
                out.boundaries.push_back(pulse_index);
            const std::uint64_t seed =
                derive_seed(model.seed, 0x5317C4u, static_cast<std::uint64_t>(id), pulse_index);
            out.pulses.push_back(propagate(params, model.path(id), temperature, model.snr_db,
                                           seed, pulse_index));
        }
    }
    return out;
}

std::vector<CaptureSet> thermal_sweep(const ChirpParams& params, const NetworkModel& model,
                                      std::size_t pulses_per_path) {
    if (pulses_per_path == 0)
        throw std::invalid_argument("thermal sweep: pulses_per_path must be > 0");
    const std::vector<double> grid = model.temperature_grid();
    std::vector<CaptureSet> sweep;
    sweep.reserve(grid.size());
    for (std::size_t t_idx = 0; t_idx < grid.size(); ++t_idx) {
        CaptureSet set;
        set.temperature = grid[t_idx];
        for (PathId id : {PathId::P1, PathId::P2, PathId::P3}) {
            for (std::size_t p = 0; p < pulses_per_path; ++p) {
                const std::uint64_t seed =
                    derive_seed(model.seed, t_idx, static_cast<std::uint64_t>(id), p);
                set.captures.push_back(propagate(params, model.path(id), grid[t_idx],
                                                 model.snr_db, seed, p));
            }
        }
        sweep.push_back(std::move(set));
    }
    return sweep;
}

} // namespace chirpcal
