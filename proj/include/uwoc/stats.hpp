#pragma once

// Exact channel and SNR statistics.
//
// Every density here is an inverse Mellin transform of a product of
// per-factor moments. The combined gain h = h_c h_p has
//
//   E[h^u] = rho2 (a0 prod a_i)^u prod_i Gamma(d_i/p_i + u/p_i) / Gamma(d_i/p_i)
//            * Gamma(rho2 + u) / Gamma(1 + rho2 + u),
//
// so its density and the SNR distribution are Fox H-functions of the single
// argument h / (a0 prod a_i). Note that a0 and prod a_i each appear once.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "uwoc/channel.hpp"
#include "uwoc/error.hpp"
#include "uwoc/foxh.hpp"
#include "uwoc/specfun.hpp"

namespace uwoc::stats {

using specfun::FoxHKernel;
using specfun::FoxHParam;

/// E[h_c^n] = prod_i a_i^n Gamma((n + d_i)/p_i) / Gamma(d_i/p_i), real n >= 0.
inline double cascade_moment(std::span<const GGLayer> layers, double n) {
    if (!(n >= 0.0)) throw DomainError("cascade_moment: order must be >= 0");
    double log_m = 0.0;
    for (const auto& l : layers)
        log_m += n * std::log(l.a) + specfun::ln_gamma((n + l.d) / l.p) - specfun::ln_gamma(l.d / l.p);
    return std::exp(log_m);
}

/// E[(h_c h_p)^n]; the pointing factor contributes rho2 a0^n / (rho2 + n).
inline double combined_moment(std::span<const GGLayer> layers, const PointingError& pe, double n) {
    return cascade_moment(layers, n) * pe.rho2 * std::pow(pe.a0, n) / (pe.rho2 + n);
}

inline std::vector<FoxHParam> layer_params(std::span<const GGLayer> layers) {
    std::vector<FoxHParam> out;
    for (const auto& l : layers) out.push_back({l.d / l.p, 1.0 / l.p});
    return out;
}

/// -sum_i ln Gamma(d_i/p_i), the normalization shared by every kernel.
inline double log_layer_norm(std::span<const GGLayer> layers) {
    double acc = 0.0;
    for (const auto& l : layers) acc -= specfun::ln_gamma(l.d / l.p);
    return acc;
}

inline double log_scale_product(std::span<const GGLayer> layers) {
    double acc = 0.0;
    for (const auto& l : layers) acc += std::log(l.a);
    return acc;
}

/// H^{N,0}_{0,N} with lower row {(d_i/p_i, 1/p_i)}.
inline FoxHKernel cascade_pdf_kernel(std::span<const GGLayer> layers) {
    auto lower = layer_params(layers);
    const std::size_t m = lower.size();
    return FoxHKernel({}, std::move(lower), m, 0);
}

/// H^{N+1,0}_{1,N+1}: upper (1+rho2, 1); lower {(d_i/p_i, 1/p_i)}, (rho2, 1).
inline FoxHKernel combined_pdf_kernel(std::span<const GGLayer> layers, const PointingError& pe) {
    auto lower = layer_params(layers);
    lower.push_back({pe.rho2, 1.0});
    const std::size_t m = lower.size();
    return FoxHKernel({{1.0 + pe.rho2, 1.0}}, std::move(lower), m, 0);
}

/// H^{N+1,1}_{2,N+2}: upper (1,1), (1+rho2,1); lower {(d_i/p_i,1/p_i)}, (rho2,1), (0,1).
inline FoxHKernel snr_cdf_kernel(std::span<const GGLayer> layers, const PointingError& pe) {
    auto lower = layer_params(layers);
    lower.push_back({pe.rho2, 1.0});
    const std::size_t m = lower.size();
    lower.push_back({0.0, 1.0});
    return FoxHKernel({{1.0, 1.0}, {1.0 + pe.rho2, 1.0}}, std::move(lower), m, 1);
}

/// Density of h_c = prod_i h_i. Returns 0 for h <= 0.
inline double pdf_cascade(std::span<const GGLayer> layers, double h) {
    if (!(h > 0.0)) return 0.0;
    const double ln_z = std::log(h) - log_scale_product(layers);
    return std::exp(log_layer_norm(layers) - std::log(h)) * specfun::foxh_eval(cascade_pdf_kernel(layers), std::exp(ln_z));
}

/// Density of h = h_c h_p. Returns 0 for h <= 0.
inline double pdf_combined(std::span<const GGLayer> layers, const PointingError& pe, double h) {
    if (!(h > 0.0)) return 0.0;
    const double ln_z = std::log(h) - std::log(pe.a0) - log_scale_product(layers);
    return pe.rho2 * std::exp(log_layer_norm(layers) - std::log(h)) *
           specfun::foxh_eval(combined_pdf_kernel(layers, pe), std::exp(ln_z));
}

/// Distribution of the instantaneous SNR gamma = gamma0 h^e (e = 2 for
/// IM/DD, 1 for heterodyne detection).
class SnrDistribution {
public:
    explicit SnrDistribution(LinkScenario scenario)
        : SnrDistribution(checked(std::move(scenario)), nullptr) {}

    SnrDistribution(LinkScenario scenario, double gamma0) : SnrDistribution(checked(std::move(scenario)), &gamma0) {}

    const LinkScenario& scenario() const noexcept { return scenario_; }
    double gamma0() const noexcept { return gamma0_; }
    /// 1 / (a0 prod a_i).
    double z_scale() const noexcept { return std::exp(log_z_scale_); }
    double log_z_scale() const noexcept { return log_z_scale_; }
    double snr_exponent() const noexcept { return exponent_; }
    /// True when the analytic forms are applied outside IM/DD (heterodyne extension).
    bool is_extension() const noexcept { return scenario_.detection != Detection::imdd; }

    /// ln(rho2 / prod Gamma(d_i/p_i)).
    double log_prefactor() const noexcept { return log_prefactor_; }

    /// Fox-H argument z_scale (gamma/gamma0)^(1/e) for gamma > 0.
    double argument(double gamma) const {
        return std::exp(log_z_scale_ + (std::log(gamma) - std::log(gamma0_)) / exponent_);
    }

    const FoxHKernel& pdf_kernel() const noexcept { return pdf_kernel_; }
    const FoxHKernel& cdf_kernel() const noexcept { return cdf_kernel_; }

private:
    static LinkScenario checked(LinkScenario s) {
        require_valid(s);
        return s;
    }

    SnrDistribution(LinkScenario s, const double* gamma0)
        : scenario_(std::move(s)),
          pdf_kernel_(combined_pdf_kernel(scenario_.layers, scenario_.pointing)),
          cdf_kernel_(snr_cdf_kernel(scenario_.layers, scenario_.pointing)) {
        gamma0_ = gamma0 ? *gamma0 : average_snr(scenario_.budget, scenario_.detection);
        if (!(gamma0_ > 0.0) || !std::isfinite(gamma0_)) throw DomainError("SnrDistribution: gamma0 must be positive");
        exponent_ = uwoc::snr_exponent(scenario_.detection);
        log_z_scale_ = -std::log(scenario_.pointing.a0) - log_scale_product(scenario_.layers);
        log_prefactor_ = std::log(scenario_.pointing.rho2) + log_layer_norm(scenario_.layers);
    }

    LinkScenario scenario_;
    FoxHKernel pdf_kernel_;
    FoxHKernel cdf_kernel_;
    double gamma0_ = 0.0;
    double exponent_ = 2.0;
    double log_z_scale_ = 0.0;
    double log_prefactor_ = 0.0;
};

/// f_gamma(gamma) = rho2 / (e gamma) prod 1/Gamma(d_i/p_i) H^{N+1,0}_{1,N+1}[z_scale (gamma/gamma0)^(1/e)].
inline double pdf_snr(const SnrDistribution& dist, double gamma) {
    if (!(gamma > 0.0)) return 0.0;
    const double z = dist.argument(gamma);
    return std::exp(dist.log_prefactor() - std::log(dist.snr_exponent() * gamma)) *
           specfun::foxh_eval(dist.pdf_kernel(), z);
}

inline constexpr double kCdfClampTolerance = 1e-6;

/// F_gamma(gamma) = rho2 prod 1/Gamma(d_i/p_i) H^{N+1,1}_{2,N+2}[z_scale (gamma/gamma0)^(1/e)].
inline double cdf_snr(const SnrDistribution& dist, double gamma) {
    if (std::isnan(gamma)) throw DomainError("cdf_snr: NaN argument");
    if (gamma <= 0.0) return 0.0;
    if (std::isinf(gamma)) return 1.0;
    const double value = std::exp(dist.log_prefactor()) * specfun::foxh_eval(dist.cdf_kernel(), dist.argument(gamma));
    if (value < -kCdfClampTolerance || value > 1.0 + kCdfClampTolerance)
        throw NonConvergenceError("cdf_snr: value " + std::to_string(value) + " outside [0, 1]");
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace uwoc::stats
