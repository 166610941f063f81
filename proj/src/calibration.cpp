#include "chirpcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chirpcal {

double estimate_delay(const SampledSignal& received, const SampledSignal& reference) {
    const std::size_t n = received.size();
    if (n == 0 || reference.size() != n)
        throw std::invalid_argument("estimate_delay: signals empty or of different length");
    if (received.sample_rate != reference.sample_rate)
        throw std::invalid_argument("estimate_delay: sample rate mismatch");

    // r(k) = sum_i received[i] * conj(reference[i-k]) over the valid overlap.
    const long long max_lag = static_cast<long long>(n) - 1;
    std::vector<double> mag(2 * n - 1);
    for (long long k = -max_lag; k <= max_lag; ++k) {
        cplx acc(0.0, 0.0);
        const long long lo = std::max<long long>(0, k);
        const long long hi = std::min<long long>(n, static_cast<long long>(n) + k);
        for (long long i = lo; i < hi; ++i)
            acc += received.samples[static_cast<std::size_t>(i)] *
                   std::conj(reference.samples[static_cast<std::size_t>(i - k)]);
        mag[static_cast<std::size_t>(k + max_lag)] = std::abs(acc);
    }

    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    if (peak == 0 || peak == mag.size() - 1)
        throw std::runtime_error("estimate_delay: correlation peak at lag range edge");

    // Quadratic interpolation of the magnitude around the peak. The raw
    // three-point vertex carries an O(0.01 sample) bias from the asymmetric
    // truncation of the finite correlation, so it only seeds the refinement.
    const double ym = mag[peak - 1], y0 = mag[peak], yp = mag[peak + 1];
    const double denom = ym - 2.0 * y0 + yp;
    double mu = 0.0;
    if (std::fabs(denom) > 1e-30 * y0)
        mu = 0.5 * (ym - yp) / denom;
    mu = std::clamp(mu, -1.0, 1.0);

    const double fs = received.sample_rate;
    double lag = static_cast<double>(peak) - static_cast<double>(max_lag) + mu;

    // Refine by maximizing the normalized correlation against delayed copies
    // of the reference, built with the same shift operator the rest of the
    // pipeline applies. By Cauchy-Schwarz the normalized statistic attains
    // its maximum exactly at the true delay for any complex path gain, so a
    // shrinking three-point vertex iteration removes the truncation bias.
    auto corr_mag = [&](double lag_samples) {
        const SampledSignal d = apply_delay(reference, lag_samples / fs);
        cplx acc(0.0, 0.0);
        double energy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += received.samples[i] * std::conj(d.samples[i]);
            energy += std::norm(d.samples[i]);
        }
        return std::abs(acc) / std::sqrt(energy);
    };

    const double lag_limit = static_cast<double>(max_lag) - 0.4;
    double h = 0.5;
    double best = corr_mag(lag);
    for (int iter = 0; iter < 6; ++iter) {
        const double lo = std::max(lag - h, -lag_limit);
        const double hi = std::min(lag + h, lag_limit);
        const double cm = corr_mag(lo), cp = corr_mag(hi);
        const double cd = cm - 2.0 * best + cp;
        if (std::fabs(cd) <= 1e-12 * (best + 1.0))
            break; // flat objective (e.g. an unmodulated tone): keep the seed
        double step = 0.5 * (cm - cp) / cd * h;
        step = std::clamp(step, -h, h);
        const double cand = std::clamp(lag + step, -lag_limit, lag_limit);
        const double yc = corr_mag(cand);
        if (cm > yc && cm >= cp) {
            lag = lo;
            best = cm;
        } else if (cp > yc) {
            lag = hi;
            best = cp;
        } else {
            lag = cand;
            best = yc;
        }
        h /= 8.0;
    }

    // Whole-sample shifts are exact by construction; snap when the refined
    // estimate lands within fitting noise of an integer.
    const double nearest = std::round(lag);
    if (std::fabs(lag - nearest) < 1e-4)
        lag = nearest;
    return lag / fs;
}

namespace {

// Circular shift by an arbitrary (possibly fractional) sample count, as a
// linear phase ramp across FFT bins. Uses apply_delay's bin convention so the
// two operators compose and cancel exactly bin-by-bin.
std::vector<cplx> circular_shift(std::vector<cplx> v, double shift_samples) {
    const std::size_t n = v.size();
    if (n < 2 || shift_samples == 0.0)
        return v;
    detail::fft(v, false);
    for (std::size_t m = 0; m < n; ++m) {
        const double fm = (m <= n / 2) ? static_cast<double>(m)
                                       : static_cast<double>(m) - static_cast<double>(n);
        v[m] *= std::polar(1.0, -kTwoPi * fm * shift_samples / static_cast<double>(n));
    }
    detail::fft(v, true);
    return v;
}

} // namespace

PathMeasurement measure_path(const CaptureRecord& capture, const ChirpParams& generator,
                             const OptimizerConfig& config) {
    generator.validate();
    const SampledSignal reference = generate_chirp(generator);
    const double delay = estimate_delay(capture.pulse, reference);
    const std::size_t n = capture.pulse.size();

    // Undo the delay. The delay operator factors into a circular shift
    // followed by zeroing the vacated entries, so the inverse is: identify
    // the zeroed run, refill it from the shifted reference scaled by the
    // least-squares complex gain over the surviving samples, and counter-
    // rotate with a single circular shift. The forward and inverse phase
    // ramps then cancel bin-by-bin; naively shifting the capture back
    // instead would smear the missing boundary samples into wrap-around
    // ringing across the whole window and bias the fitted amplitude/phase.
    SampledSignal aligned = capture.pulse;
    aligned.start_time = 0.0;
    const double shift = delay * generator.sample_rate;
    if (shift != 0.0) {
        const std::vector<cplx> shifted_ref = circular_shift(reference.samples, shift);

        // Vacated entries sit at the head for positive delays, at the tail
        // for negative ones. The chirp has constant modulus, so zeroed
        // samples sit far below the RMS level; the rounded shift bounds how
        // long the run can be.
        const double rms = std::sqrt(aligned.power());
        const long long k_round = std::llround(shift);
        const long long limit =
            std::min<long long>(std::llabs(k_round) + 1, static_cast<long long>(n) - 1);
        long long dead = 0;
        while (dead < limit) {
            const std::size_t at = (shift > 0.0) ? static_cast<std::size_t>(dead)
                                                 : n - 1 - static_cast<std::size_t>(dead);
            if (std::abs(aligned.samples[at]) >= 0.5 * rms)
                break;
            ++dead;
        }

        cplx num(0.0, 0.0);
        double den = 0.0;
        const std::size_t first = (shift > 0.0) ? static_cast<std::size_t>(dead) : 0;
        const std::size_t last = (shift > 0.0) ? n : n - static_cast<std::size_t>(dead);
        for (std::size_t i = first; i < last; ++i) {
            num += std::conj(shifted_ref[i]) * aligned.samples[i];
            den += std::norm(shifted_ref[i]);
        }
        const cplx path_gain = (den > 0.0) ? num / den : cplx(0.0, 0.0);
        for (long long i = 0; i < dead; ++i) {
            const std::size_t at = (shift > 0.0) ? static_cast<std::size_t>(i)
                                                 : n - 1 - static_cast<std::size_t>(i);
            aligned.samples[at] = path_gain * shifted_ref[at];
        }
        aligned.samples = circular_shift(std::move(aligned.samples), -shift);
    }

    // The optimizer's shared stepsize is sized for captures near full scale
    // (amplitude ~ 1): per-epoch parameter travel is bounded by the stepsize,
    // so a +30 dB path would need far more than max_epochs to reach A ~ 32.
    // Bring the window to unit chirp amplitude first (the chirp has constant
    // modulus, so sqrt(mean power) is the amplitude), fit, and scale back.
    // A positive real scale leaves the phase estimate untouched.
    const double coarse_amplitude = std::sqrt(aligned.power());
    SampledSignal normalized = aligned;
    if (coarse_amplitude > 0.0)
        for (cplx& s : normalized.samples)
            s /= coarse_amplitude;

    FitResult res = fit(normalized, generator, config);

    PathMeasurement m;
    m.path = capture.path;
    m.temperature = capture.temperature;
    m.amplitude = coarse_amplitude > 0.0 ? res.amplitude * coarse_amplitude : res.amplitude;
    m.phase = res.phase;
    m.group_delay = delay;
    m.final_cost = res.final_cost;
    m.epochs_run = res.epochs_run;
    m.converged_epoch = res.converged_epoch;
    m.error_history = std::move(res.error_history);
    if (!(m.amplitude > 0.0))
        throw std::runtime_error("measure_path: fitted amplitude is not positive");
    return m;
}

SampledSignal coherent_sum(std::span<const SampledSignal> pulses) {
    if (pulses.empty())
        throw std::invalid_argument("coherent_sum: no pulses");
    const std::size_t n = pulses.front().size();
    SampledSignal out = pulses.front();
    for (std::size_t p = 1; p < pulses.size(); ++p) {
        if (pulses[p].size() != n || pulses[p].sample_rate != out.sample_rate)
            throw std::invalid_argument("coherent_sum: pulse shape mismatch");
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] += pulses[p].samples[i];
    }
    const double scale = 1.0 / static_cast<double>(pulses.size());
    for (cplx& s : out.samples)
        s *= scale;
    return out;
}

AmplifierMeasurement derive_amplifier(const PathMeasurement& active,
                                      const PathMeasurement& reference_path,
                                      const OffsetTable& offsets) {
    if (active.path == PathId::P3)
        throw std::invalid_argument("derive_amplifier: active measurement must be P1 or P2");
    if (reference_path.path != PathId::P3)
        throw std::invalid_argument("derive_amplifier: reference measurement must be P3");
    if (active.temperature != reference_path.temperature)
        throw std::invalid_argument("derive_amplifier: temperature mismatch");
    if (!(active.amplitude > 0.0) || !(reference_path.amplitude > 0.0))
        throw std::invalid_argument("derive_amplifier: nonpositive amplitude");

    PathOffset off;
    if (auto it = offsets.find(active.path); it != offsets.end())
        off = it->second;

    AmplifierMeasurement out;
    out.element = (active.path == PathId::P1) ? Element::HPA : Element::LNA;
    out.temperature = active.temperature;
    out.gain_db = linear_to_db(active.amplitude / reference_path.amplitude) - off.gain_db;
    out.phase = wrap_phase(active.phase - reference_path.phase - off.phase);
    return out;
}

CalibrationRecord derive_factors(const AmplifierMeasurement& measured,
                                 const AmplifierMeasurement& reference) {
    if (measured.element != reference.element)
        throw std::invalid_argument("derive_factors: element mismatch");

    CalibrationRecord rec;
    rec.element = measured.element;
    rec.temperature = measured.temperature;
    rec.gain_db = measured.gain_db;
    rec.phase = measured.phase;
    rec.ref_gain_db = reference.gain_db;
    rec.ref_phase = reference.phase;
    rec.k_db = reference.gain_db - measured.gain_db;
    rec.k_linear = db_to_linear(rec.k_db);
    rec.theta = wrap_phase(reference.phase - measured.phase);
    rec.comp_gain_db = measured.gain_db + rec.k_db;
    rec.comp_phase = wrap_phase(measured.phase + rec.theta);
    return rec;
}

namespace {

struct DwellMeasurements {
    PathMeasurement p1, p2, p3;
};

PathMeasurement measure_dwell_path(const CaptureSet& set, PathId id,
                                   const ChirpParams& generator,
                                   const OptimizerConfig& config) {
    const auto pulses = set.path_captures(id);
    std::vector<SampledSignal> signals;
    signals.reserve(pulses.size());
    for (const CaptureRecord* rec : pulses)
        signals.push_back(rec->pulse);

    CaptureRecord combined;
    combined.temperature = set.temperature;
    combined.path = id;
    combined.pulse_index = 0;
    combined.pulse = coherent_sum(signals);
    try {
        return measure_path(combined, generator, config);
    } catch (const DivergenceError& e) {
        std::ostringstream os;
        os << "fit diverged on " << to_string(id) << " at " << set.temperature << " C: "
           << e.what();
        throw DivergenceError(os.str(), e.epoch, e.state);
    }
}

} // namespace

std::vector<CalibrationRecord> run_calibration(const std::vector<CaptureSet>& sweep,
                                               const ChirpParams& generator,
                                               const OptimizerConfig& config, double t_ref,
                                               const CalibrationOptions& options) {
    if (sweep.empty())
        throw std::invalid_argument("run_calibration: empty sweep");

    // Coverage check: every temperature needs all three paths, and T_ref must
    // be one of the dwell temperatures.
    std::vector<std::string> gaps;
    std::optional<std::size_t> ref_index;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        for (PathId id : {PathId::P1, PathId::P2, PathId::P3}) {
            if (sweep[i].path_captures(id).empty()) {
                std::ostringstream os;
                os << "missing " << to_string(id) << " captures at " << sweep[i].temperature
                   << " C";
                gaps.push_back(os.str());
            }
        }
        if (std::fabs(sweep[i].temperature - t_ref) < 1e-9)
            ref_index = i;
    }
    if (!ref_index) {
        std::ostringstream os;
        os << "reference temperature " << t_ref << " C not present in the sweep";
        gaps.push_back(os.str());
    }
    if (!gaps.empty()) {
        std::string msg = "calibration input gaps:";
        for (const std::string& g : gaps)
            msg += "\n  - " + g;
        throw std::runtime_error(msg);
    }

    std::vector<DwellMeasurements> dwells(sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        dwells[i].p1 = measure_dwell_path(sweep[i], PathId::P1, generator, config);
        dwells[i].p2 = measure_dwell_path(sweep[i], PathId::P2, generator, config);
        dwells[i].p3 = measure_dwell_path(sweep[i], PathId::P3, generator, config);
    }

    OffsetTable offsets;
    switch (options.offsets_mode) {
    case OffsetsMode::Zero:
        break;
    case OffsetsMode::External:
        offsets = options.external_offsets;
        break;
    case OffsetsMode::CharacterizeAtTref: {
        // Raw path/P3 ratio at T_ref minus the element's nominal reference:
        // what remains is the passive residual the later dwells subtract.
        const DwellMeasurements& ref = dwells[*ref_index];
        const AmplifierMeasurement raw_h = derive_amplifier(ref.p1, ref.p3, {});
        const AmplifierMeasurement raw_l = derive_amplifier(ref.p2, ref.p3, {});
        offsets[PathId::P1] = {raw_h.gain_db - options.hpa_nominal_gain_db,
                               wrap_phase(raw_h.phase - options.hpa_nominal_phase)};
        offsets[PathId::P2] = {raw_l.gain_db - options.lna_nominal_gain_db,
                               wrap_phase(raw_l.phase - options.lna_nominal_phase)};
        break;
    }
    }

    std::vector<AmplifierMeasurement> hpa(sweep.size()), lna(sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        hpa[i] = derive_amplifier(dwells[i].p1, dwells[i].p3, offsets);
        lna[i] = derive_amplifier(dwells[i].p2, dwells[i].p3, offsets);
    }

    const AmplifierMeasurement hpa_ref =
        options.external_hpa_reference ? *options.external_hpa_reference : hpa[*ref_index];
    const AmplifierMeasurement lna_ref =
        options.external_lna_reference ? *options.external_lna_reference : lna[*ref_index];

    std::vector<CalibrationRecord> records;
    records.reserve(2 * sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i)
        records.push_back(derive_factors(hpa[i], hpa_ref));
    for (std::size_t i = 0; i < sweep.size(); ++i)
        records.push_back(derive_factors(lna[i], lna_ref));

    std::stable_sort(records.begin(), records.end(),
                     [](const CalibrationRecord& a, const CalibrationRecord& b) {
                         if (a.element != b.element)
                             return static_cast<int>(a.element) < static_cast<int>(b.element);
                         return a.temperature < b.temperature;
                     });
    return records;
}

} // namespace chirpcal
