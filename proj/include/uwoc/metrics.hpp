#pragma once

// Outage probability, average BER, ergodic capacity and diversity order.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "uwoc/channel.hpp"
#include "uwoc/error.hpp"
#include "uwoc/foxh.hpp"
#include "uwoc/stats.hpp"

namespace uwoc::metrics {

using specfun::FoxHKernel;
using specfun::FoxHParam;
using stats::SnrDistribution;

/// Which leading pole of the Mellin kernel an asymptotic term came from.
struct PoleOrigin {
    enum class Kind { layer, pointing } kind;
    std::size_t layer = 0;  // valid when kind == layer

    std::string label() const {
        return kind == Kind::pointing ? std::string("rho2") : "d[" + std::to_string(layer) + "]";
    }
};

/// One term of a high-SNR expansion: value = coefficient * x^(e * exponent),
/// where x is the metric's Fox-H argument base (see outage_asymptotic and
/// ber_asymptotic), so the term decays like gamma0^(-exponent).
struct AsymptoticTerm {
    double exponent;
    double coefficient;
    PoleOrigin origin;
    double value;
};

struct AsymptoticResult {
    double value = 0.0;
    std::vector<AsymptoticTerm> terms;

    /// Smallest decay exponent among terms with a nonzero coefficient.
    double dominant_exponent() const {
        double out = std::numeric_limits<double>::infinity();
        for (const auto& t : terms)
            if (t.coefficient != 0.0) out = std::min(out, t.exponent);
        return out;
    }
};

namespace detail {

// Leading pole ratios b_k/beta_k of the lower numerator factors: d_i per layer, then rho2.
inline std::vector<double> leading_poles(const LinkScenario& s) {
    std::vector<double> out;
    for (const auto& l : s.layers) out.push_back(l.d);
    out.push_back(s.pointing.rho2);
    return out;
}

inline PoleOrigin origin_of(const LinkScenario& s, std::size_t k) {
    if (k < s.layers.size()) return {PoleOrigin::Kind::layer, k};
    return {PoleOrigin::Kind::pointing, 0};
}

// Signed Gamma(x) as (ln|Gamma|, sign); throws at poles.
inline std::pair<double, int> signed_log_gamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) throw PoleCollisionError("asymptotic expansion: Gamma pole at " + std::to_string(x));
    int sign = 1;
    const double lg = boost::math::lgamma(x, &sign);
    return {lg, sign};
}

inline bool at_gamma_pole(double x) { return x <= 0.0 && std::abs(x - std::round(x)) < 1e-12; }

// One Gamma factor of the Mellin kernel evaluated at s: Gamma(arg + slope s).
struct GammaFactor {
    double arg;
    double slope;
    bool used = false;
};

// Coefficient of z^r in the residue of chi(s) z^-s at the leading pole
// s = -r of lower numerator factor k, assuming it is a simple pole.
// A numerator and a denominator factor sitting on poles with the same slope
// cancel to (-1)^(x-y) Gamma(1-y) / Gamma(1-x).
inline double leading_residue(const FoxHKernel& kernel, std::size_t k) {
    const auto& lower = kernel.lower();
    const auto& upper = kernel.upper();
    const double r = lower[k].shift / lower[k].scale;
    std::vector<GammaFactor> num, den;
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (j == k) continue;
        if (j < kernel.m()) num.push_back({lower[j].shift - r * lower[j].scale, lower[j].scale});
        else den.push_back({1.0 - lower[j].shift + r * lower[j].scale, -lower[j].scale});
    }
    for (std::size_t j = 0; j < upper.size(); ++j) {
        if (j < kernel.n()) num.push_back({1.0 - upper[j].shift + r * upper[j].scale, -upper[j].scale});
        else den.push_back({upper[j].shift - r * upper[j].scale, upper[j].scale});
    }

    double log_mag = -std::log(lower[k].scale);
    int sign = 1;
    auto accumulate = [&](double x, bool denominator) {
        const auto [lg, sg] = signed_log_gamma(x);
        log_mag += denominator ? -lg : lg;
        sign *= sg;
    };
    for (auto& a : num) {
        if (!at_gamma_pole(a.arg)) continue;
        for (auto& b : den) {
            if (b.used || !at_gamma_pole(b.arg) || std::abs(a.slope - b.slope) > 1e-12) continue;
            accumulate(1.0 - b.arg, false);
            accumulate(1.0 - a.arg, true);
            if (static_cast<long long>(std::round(a.arg - b.arg)) % 2 != 0) sign = -sign;
            a.used = b.used = true;
            break;
        }
    }
    for (const auto& a : num)
        if (!a.used) accumulate(a.arg, false);
    for (const auto& b : den) {
        if (b.used) continue;
        if (at_gamma_pole(b.arg)) return 0.0;  // 1/Gamma vanishes
        accumulate(b.arg, true);
    }
    const double out = sign * std::exp(log_mag);
    if (!std::isfinite(out)) throw PoleCollisionError("asymptotic expansion: non-finite coefficient");
    return out;
}

}  // namespace detail

inline constexpr double kPoleCollisionTolerance = 1e-9;

/// Throws PoleCollisionError when two of {d_i} and rho2 coincide.
inline void require_simple_poles(const LinkScenario& s) {
    const auto poles = detail::leading_poles(s);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (std::abs(poles[i] - poles[j]) <= kPoleCollisionTolerance) {
                throw PoleCollisionError("pole collision between " + detail::origin_of(s, i).label() + " and " +
                                         detail::origin_of(s, j).label() + " (both " + std::to_string(poles[i]) +
                                         "); the simple-pole expansion does not apply");
            }
        }
    }
}

/// H^{N+1,2}_{3,N+2}: upper (1,1), (1-phi,1/2), (1+rho2,1); lower {(d_i/p_i,1/p_i)}, (rho2,1), (0,1).
inline FoxHKernel ber_kernel(const LinkScenario& s) {
    auto lower = stats::layer_params(s.layers);
    lower.push_back({s.pointing.rho2, 1.0});
    const std::size_t m = lower.size();
    lower.push_back({0.0, 1.0});
    return FoxHKernel({{1.0, 1.0}, {1.0 - s.modulation.phi, 0.5}, {1.0 + s.pointing.rho2, 1.0}}, std::move(lower), m, 2);
}

/// H^{N+3,1}_{3,N+3}: upper (0,1/2), (1,1/2), (1+rho2,1); lower {(d_i/p_i,1/p_i)}, (rho2,1), (0,1/2), (0,1/2).
inline FoxHKernel capacity_kernel(const LinkScenario& s) {
    auto lower = stats::layer_params(s.layers);
    lower.push_back({s.pointing.rho2, 1.0});
    lower.push_back({0.0, 0.5});
    lower.push_back({0.0, 0.5});
    const std::size_t m = lower.size();
    return FoxHKernel({{0.0, 0.5}, {1.0, 0.5}, {1.0 + s.pointing.rho2, 1.0}}, std::move(lower), m, 1);
}

/// P(gamma < gamma_th).
inline double outage_exact(const SnrDistribution& dist, double gamma_th) {
    if (!(gamma_th > 0.0)) throw DomainError("outage_exact: threshold must be positive");
    return stats::cdf_snr(dist, gamma_th);
}

/// High-SNR outage: sum over the N+1 leading poles of coefficient * z^(b_k/beta_k),
/// z = z_scale (gamma_th/gamma0)^(1/e).
inline AsymptoticResult outage_asymptotic(const SnrDistribution& dist, double gamma_th) {
    if (!(gamma_th > 0.0)) throw DomainError("outage_asymptotic: threshold must be positive");
    const auto& s = dist.scenario();
    require_simple_poles(s);
    const double ln_z = std::log(dist.argument(gamma_th));
    const double pref = std::exp(dist.log_prefactor());
    AsymptoticResult out;
    const auto poles = detail::leading_poles(s);
    for (std::size_t k = 0; k < poles.size(); ++k) {
        const double coef = pref * detail::leading_residue(dist.cdf_kernel(), k);
        const double value = coef * std::exp(poles[k] * ln_z);
        out.terms.push_back({poles[k] / dist.snr_exponent(), coef, detail::origin_of(s, k), value});
        out.value += value;
    }
    return out;
}

/// Dominant high-SNR decay exponent min({d_i} U {rho2}) / e.
inline double diversity_order(const LinkScenario& s) {
    double m = s.pointing.rho2;
    for (const auto& l : s.layers) m = std::min(m, l.d);
    return m / snr_exponent(s.detection);
}

/// The pole-dominance diversity order next to two other closed forms one
/// might write for it: sum_i min(d_i, rho2)/e and min(sum_i d_i, rho2)/e.
struct DiversityReadings {
    double pole_dominance;
    double sum_of_minima;
    double min_of_sum;
};

inline DiversityReadings diversity_readings(const LinkScenario& s) {
    const double e = snr_exponent(s.detection);
    double sum_min = 0.0, sum_d = 0.0;
    for (const auto& l : s.layers) {
        sum_min += std::min(l.d, s.pointing.rho2) / e;
        sum_d += l.d / e;
    }
    return {diversity_order(s), sum_min, std::min(sum_d, s.pointing.rho2 / e)};
}

namespace detail {

inline void require_imdd(const SnrDistribution& dist, const char* what) {
    if (dist.snr_exponent() != 2.0)
        throw UnsupportedError(std::string(what) + ": analytic form is derived for IM/DD only; use Monte Carlo for HD");
}

}  // namespace detail

/// Average BER, delta rho2 / (2 Gamma(phi)) prod 1/Gamma(d_i/p_i) sum_n H^{N+1,2}_{3,N+2}[z_scale / sqrt(q_n gamma0)].
inline double ber_exact(const SnrDistribution& dist, const ModulationScheme& mod) {
    detail::require_imdd(dist, "ber_exact");
    const FoxHKernel kernel = ber_kernel({dist.scenario().layers, dist.scenario().pointing, {}, mod, Detection::imdd});
    const double pref = mod.delta / (2.0 * std::tgamma(mod.phi)) * std::exp(dist.log_prefactor());
    double acc = 0.0;
    for (double q : mod.q) acc += specfun::foxh_eval(kernel, dist.z_scale() / std::sqrt(q * dist.gamma0()));
    return pref * acc;
}

inline double ber_exact(const SnrDistribution& dist) { return ber_exact(dist, dist.scenario().modulation); }

/// High-SNR BER. Term coefficients multiply (z_scale / sqrt(gamma0))^(b_k/beta_k);
/// the q_n dependence is folded into them.
inline AsymptoticResult ber_asymptotic(const SnrDistribution& dist, const ModulationScheme& mod) {
    detail::require_imdd(dist, "ber_asymptotic");
    const auto& s = dist.scenario();
    require_simple_poles(s);
    const FoxHKernel kernel = ber_kernel({s.layers, s.pointing, {}, mod, Detection::imdd});
    const double pref = mod.delta / (2.0 * std::tgamma(mod.phi)) * std::exp(dist.log_prefactor());
    const double ln_base = dist.log_z_scale() - 0.5 * std::log(dist.gamma0());
    AsymptoticResult out;
    const auto poles = detail::leading_poles(s);
    for (std::size_t k = 0; k < poles.size(); ++k) {
        double qsum = 0.0;
        for (double q : mod.q) qsum += std::pow(q, -0.5 * poles[k]);
        const double coef = pref * detail::leading_residue(kernel, k) * qsum;
        const double value = coef * std::exp(poles[k] * ln_base);
        out.terms.push_back({poles[k] / 2.0, coef, detail::origin_of(s, k), value});
        out.value += value;
    }
    return out;
}

inline AsymptoticResult ber_asymptotic(const SnrDistribution& dist) {
    return ber_asymptotic(dist, dist.scenario().modulation);
}

/// Ergodic capacity E[log2(1 + kappa gamma)] in bits/s/Hz:
/// log2(e)/2 rho2 prod 1/Gamma(d_i/p_i) H^{N+3,1}_{3,N+3}[z_scale / sqrt(kappa gamma0)].
inline double capacity_exact(const SnrDistribution& dist) {
    detail::require_imdd(dist, "capacity_exact");
    const double kappa = capacity_kappa(dist.scenario().detection);
    const double z = dist.z_scale() / std::sqrt(kappa * dist.gamma0());
    const double value = 0.5 * std::numbers::log2e * std::exp(dist.log_prefactor()) *
                         specfun::foxh_eval(capacity_kernel(dist.scenario()), z);
    return std::max(value, 0.0);
}

}  // namespace uwoc::metrics
