#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace chirpcal {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/* Wrap an angle onto (-pi, pi]. */
inline double wrap_phase(double rad) {
    double w = std::remainder(rad, kTwoPi);
    if (w <= -kPi)
        w += kTwoPi;
    return w;
}

/* Smallest absolute angular separation between two angles, in [0, pi]. */
inline double circular_distance(double a, double b) {
    return std::fabs(wrap_phase(a - b));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }
inline double linear_to_db(double amplitude) { return 20.0 * std::log10(amplitude); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/* splitmix64 step; used to derive independent per-capture noise seeds from a
 * base seed and structural indices, so captures are reproducible no matter in
 * which order they are generated. */
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

} // namespace chirpcal
