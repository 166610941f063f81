#include "chirpcal/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace chirpcal {

std::size_t ChirpParams::sample_count() const {
    return static_cast<std::size_t>(std::floor(pulse_duration * sample_rate));
}

void ChirpParams::validate() const {
    if (!(pulse_duration > 0.0))
        throw std::invalid_argument("chirp: pulse_duration must be > 0");
    if (!(sample_rate > 0.0))
        throw std::invalid_argument("chirp: sample_rate must be > 0");
    if (!(pri > 0.0))
        throw std::invalid_argument("chirp: pri must be > 0");
    if (pulse_duration > pri)
        throw std::invalid_argument("chirp: pulse_duration exceeds pri");
    if (!std::isfinite(amplitude) || !std::isfinite(chirp_rate) ||
        !std::isfinite(center_frequency) || !std::isfinite(phase))
        throw std::invalid_argument("chirp: non-finite parameter");
    if (sample_count() < 2)
        throw std::invalid_argument("chirp: fewer than 2 samples (T*fs too small)");
}

double SampledSignal::power() const {
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (const cplx& s : samples)
        acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

double SampledSignal::energy() const {
    double acc = 0.0;
    for (const cplx& s : samples)
        acc += std::norm(s);
    return acc;
}

SampledSignal generate_chirp(const ChirpParams& params, double t0) {
    params.validate();
    const std::size_t n = params.sample_count();
    const double freq_coeff =
        (params.convention == FreqTermConvention::TwoPi) ? kTwoPi : kPi;

    SampledSignal out;
    out.sample_rate = params.sample_rate;
    out.start_time = t0;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) / params.sample_rate;
        const double ph = kPi * params.chirp_rate * t * t +
                          freq_coeff * params.center_frequency * t + params.phase;
        out.samples[i] = std::polar(params.amplitude, ph);
    }
    return out;
}

SampledSignal apply_gain_phase(const SampledSignal& sig, double gain_db, double phase_rad) {
    if (!std::isfinite(gain_db) || !std::isfinite(phase_rad))
        throw std::invalid_argument("apply_gain_phase: non-finite argument");
    const cplx factor = std::polar(db_to_linear(gain_db), phase_rad);
    SampledSignal out = sig;
    for (cplx& s : out.samples)
        s *= factor;
    return out;
}

namespace detail {

static void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const cplx wl = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (cplx& x : a)
            x /= static_cast<double>(n);
    }
}

/* Bluestein's algorithm: re-express a length-N DFT as a convolution that a
 * power-of-two FFT can evaluate. Angles use k^2 mod 2N to avoid precision
 * loss from large arguments. */
static void fft_bluestein(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1)
        m <<= 1;

    std::vector<cplx> w(n); // w[k] = exp(-j*pi*k^2/n), conjugated for inverse
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        double ang = -kPi * static_cast<double>(k2) / static_cast<double>(n);
        if (inverse)
            ang = -ang;
        w[k] = std::polar(1.0, ang);
    }

    std::vector<cplx> x(m, cplx(0.0, 0.0));
    std::vector<cplx> y(m, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k)
        x[k] = a[k] * w[k];
    y[0] = std::conj(w[0]);
    for (std::size_t k = 1; k < n; ++k)
        y[k] = y[m - k] = std::conj(w[k]);

    fft_pow2(x, false);
    fft_pow2(y, false);
    for (std::size_t k = 0; k < m; ++k)
        x[k] *= y[k];
    fft_pow2(x, true);

    for (std::size_t k = 0; k < n; ++k)
        a[k] = x[k] * w[k];
    if (inverse) {
        for (cplx& v : a)
            v /= static_cast<double>(n);
    }
}

void fft(std::vector<cplx>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n < 2)
        return;
    if (std::has_single_bit(n))
        fft_pow2(data, inverse);
    else
        fft_bluestein(data, inverse);
}

} // namespace detail

SampledSignal apply_delay(const SampledSignal& sig, double delay_s) {
    const std::size_t n = sig.size();
    if (n == 0)
        throw std::invalid_argument("apply_delay: empty signal");
    if (!(sig.sample_rate > 0.0))
        throw std::invalid_argument("apply_delay: sample_rate must be > 0");
    if (!std::isfinite(delay_s) || std::fabs(delay_s) >= sig.duration())
        throw std::invalid_argument("apply_delay: |delay| must be below the record duration");

    const double shift = delay_s * sig.sample_rate; // in samples
    const long long k = std::llround(shift);
    const double frac = shift - static_cast<double>(k);

    SampledSignal out = sig;
    if (frac != 0.0) {
        detail::fft(out.samples, false);
        for (std::size_t m = 0; m < n; ++m) {
            // Signed bin index; for even n the bin n/2 is kept positive, which
            // is fine for complex data.
            const double fm = (m <= n / 2) ? static_cast<double>(m)
                                           : static_cast<double>(m) - static_cast<double>(n);
            out.samples[m] *= std::polar(1.0, -kTwoPi * fm * frac / static_cast<double>(n));
        }
        detail::fft(out.samples, true);
    }
    if (k > 0) {
        for (std::size_t i = n; i-- > static_cast<std::size_t>(k);)
            out.samples[i] = out.samples[i - static_cast<std::size_t>(k)];
        std::fill(out.samples.begin(), out.samples.begin() + static_cast<std::ptrdiff_t>(k),
                  cplx(0.0, 0.0));
    } else if (k < 0) {
        const std::size_t ka = static_cast<std::size_t>(-k);
        for (std::size_t i = 0; i + ka < n; ++i)
            out.samples[i] = out.samples[i + ka];
        std::fill(out.samples.end() - static_cast<std::ptrdiff_t>(ka), out.samples.end(),
                  cplx(0.0, 0.0));
    }
    return out;
}

SampledSignal add_awgn(const SampledSignal& sig, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0.0)
        return sig;
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("add_awgn: snr_db must be finite or +inf");
    const double p = sig.power();
    if (!(p > 0.0))
        throw std::invalid_argument("add_awgn: input power is zero");

    const double noise_power = p / std::pow(10.0, snr_db / 10.0);
    const double comp_sigma = std::sqrt(noise_power / 2.0);

    // Box-Muller over raw engine output: std::normal_distribution is
    // implementation-defined, and reproducibility across toolchains matters
    // for the deterministic-rerun guarantee.
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
    };
    SampledSignal out = sig;
    for (cplx& s : out.samples) {
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        s += cplx(comp_sigma * r * std::cos(kTwoPi * u2),
                  comp_sigma * r * std::sin(kTwoPi * u2));
    }
    return out;
}

} // namespace chirpcal
