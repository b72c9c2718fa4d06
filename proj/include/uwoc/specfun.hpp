#pragma once

// Scalar special functions used by the channel statistics.
//
// The real-argument functions wrap the standard library and Boost.Math; the
// complex log-gamma is a Lanczos approximation with reflection, which is what
// the Mellin-Barnes integrands need along vertical contours.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "uwoc/error.hpp"

namespace uwoc::specfun {

using complex = std::complex<double>;

inline double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive, got " + std::to_string(x));
    return boost::math::lgamma(x);
}

inline double erf(double x) { return std::erf(x); }

inline double bessel_k0(double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k0: argument must be positive, got " + std::to_string(x));
    return std::cyl_bessel_k(0.0, x);
}

/// Gamma(phi, x) = integral from x to infinity of t^(phi-1) e^(-t) dt.
inline double upper_incomplete_gamma(double phi, double x) {
    if (!(phi > 0.0) || !(x >= 0.0))
        throw DomainError("upper_incomplete_gamma: need phi > 0 and x >= 0");
    if (x == 0.0) return std::tgamma(phi);
    return boost::math::tgamma(phi, x);
}

namespace detail {

inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline bool is_nonpositive_integer(complex s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

// ln Gamma(s) for Re(s) >= 1/2.
inline complex lanczos_log_gamma(complex s) {
    s -= 1.0;
    complex series = kLanczosCoef[0];
    for (std::size_t k = 1; k < kLanczosCoef.size(); ++k) series += kLanczosCoef[k] / (s + static_cast<double>(k));
    const complex t = s + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (s + 0.5) * std::log(t) - t + std::log(series);
}

// log(sin(pi s)) without overflow for large |Im s|; defined modulo 2 pi i.
inline complex log_sin_pi(complex s) {
    constexpr double pi = std::numbers::pi;
    const bool lower = s.imag() < 0.0;
    if (lower) s = std::conj(s);
    // sin(pi s) = exp(-i pi s) (1 - exp(2 i pi s)) i/2, with |exp(2 i pi s)| <= 1 for Im s >= 0.
    const complex i{0.0, 1.0};
    const complex w = std::exp(2.0 * i * pi * s);
    complex out = -i * pi * s + std::log(1.0 - w) - std::log(2.0) + i * (pi / 2.0);
    return lower ? std::conj(out) : out;
}

}  // namespace detail

/// Log-gamma continued analytically off the real axis. Exponentiating it
/// gives Gamma(s); the imaginary part is continuous along vertical lines in
/// the right half plane.
inline complex ln_gamma_complex(complex s) {
    if (detail::is_nonpositive_integer(s))
        throw PoleError("ln_gamma_complex: pole at s = " + std::to_string(s.real()));
    if (s.real() >= 0.5) return detail::lanczos_log_gamma(s);
    return std::log(std::numbers::pi) - detail::log_sin_pi(s) - detail::lanczos_log_gamma(1.0 - s);
}

/// -ln Gamma(s), finite everywhere except that 1/Gamma vanishes at the poles,
/// where the real part is -infinity.
inline complex ln_reciprocal_gamma(complex s) {
    if (detail::is_nonpositive_integer(s)) return {-std::numeric_limits<double>::infinity(), 0.0};
    return -ln_gamma_complex(s);
}

}  // namespace uwoc::specfun
