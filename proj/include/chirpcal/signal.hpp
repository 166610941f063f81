#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chirpcal/common.hpp"

namespace chirpcal {

/* Coefficient convention for the linear frequency term of the pulse phase.
 * TwoPi gives the standard phase pi*Kr*t^2 + 2*pi*f*t + omega; PaperPi keeps
 * the literal pi*f*t form some texts print. */
enum class FreqTermConvention { TwoPi, PaperPi };

/* Parameters of one linear-FM pulse, s(t) = A*exp(j(pi*Kr*t^2 + c*f*t + w)). */
struct ChirpParams {
    double amplitude = 1.0;        // A, linear
    double chirp_rate = 0.0;       // Kr, Hz/s
    double center_frequency = 0.0; // f, Hz
    double phase = 0.0;            // omega, rad
    double pulse_duration = 0.0;   // T, s
    double sample_rate = 0.0;      // fs, Hz
    double pri = 0.0;              // pulse repetition interval, s
    FreqTermConvention convention = FreqTermConvention::TwoPi;

    std::size_t sample_count() const;
    double bandwidth() const { return chirp_rate * pulse_duration; }
    /* Throws std::invalid_argument when a field is out of range. */
    void validate() const;
};

/* A uniformly sampled complex baseband record. start_time is the time of
 * sample 0 relative to the pulse trigger. */
struct SampledSignal {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    double start_time = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration() const { return samples.size() / sample_rate; }
    double time_at(std::size_t i) const { return start_time + i / sample_rate; }
    /* Mean |x|^2 over all samples. */
    double power() const;
    double energy() const;
};

/* Sample the pulse over [t0, t0 + N/fs) with N = floor(T*fs). */
SampledSignal generate_chirp(const ChirpParams& params, double t0 = 0.0);

/* Multiply by a fixed complex factor given as gain in dB and phase in rad. */
SampledSignal apply_gain_phase(const SampledSignal& sig, double gain_db, double phase_rad);

/* Time-shift by delay_s (positive = later arrival). The integer-sample part is
 * an index shift with zero fill; the residual fraction (|frac| <= 0.5 sample)
 * is a linear-phase multiply in the frequency domain. |delay| must be smaller
 * than the record duration. */
SampledSignal apply_delay(const SampledSignal& sig, double delay_s);

/* Add complex white Gaussian noise at the requested SNR relative to the mean
 * input power. Deterministic for a given seed; +infinity disables noise. */
SampledSignal add_awgn(const SampledSignal& sig, double snr_db, std::uint64_t seed);

namespace detail {
/* In-place complex FFT of arbitrary length (radix-2 Cooley-Tukey, Bluestein
 * for non-power-of-two sizes). Forward is unscaled; inverse divides by N. */
void fft(std::vector<cplx>& data, bool inverse);
} // namespace detail

} // namespace chirpcal
