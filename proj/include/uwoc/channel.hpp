#pragma once

// Link model: generalized-Gamma turbulence layers, zero-boresight pointing
// errors, path loss, noise and modulation.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "uwoc/error.hpp"
#include "uwoc/specfun.hpp"

namespace uwoc {

/// Generalized-Gamma fading of one ocean layer:
///   f(h) = p / (a^d Gamma(d/p)) h^(d-1) exp(-(h/a)^p),  h >= 0.
/// With p = 1 this is Gamma(shape d, scale a).
struct GGLayer {
    double a;
    double d;
    double p;

    /// d/p, the shape of the Gamma variate behind the layer.
    double gamma_shape() const noexcept { return d / p; }
};

/// Zero-boresight pointing errors: f(h_p) = rho2 / a0^rho2 * h_p^(rho2-1) on [0, a0].
struct PointingError {
    double rho2;
    double a0;
};

/// Path loss and receiver noise.
struct LinkBudget {
    double pt_dbm;
    double sigma_w2;
    double alpha;     // extinction coefficient, 1/m
    double length_m;

    double path_gain() const { return std::exp(-alpha * length_m); }
    double pt_watts() const { return std::pow(10.0, (pt_dbm - 30.0) / 10.0); }
};

/// Generic BER template parameters {M, delta, phi, q_n}: the conditional
/// error probability is delta / (2 Gamma(phi)) sum_n Gamma(phi, q_n gamma).
struct ModulationScheme {
    double delta;
    double phi;
    std::vector<double> q;

    static ModulationScheme ook() { return {1.0, 0.5, {0.5}}; }
    std::size_t order() const noexcept { return q.size(); }
};

enum class Detection { imdd, hd };

inline const char* to_string(Detection d) { return d == Detection::imdd ? "imdd" : "hd"; }

struct LinkScenario {
    std::vector<GGLayer> layers;
    PointingError pointing;
    LinkBudget budget;
    ModulationScheme modulation;
    Detection detection = Detection::imdd;
};

/// Capacity constant: e/(2 pi) for IM/DD, 1 for heterodyne detection.
inline double capacity_kappa(Detection d) { return d == Detection::imdd ? std::numbers::e / (2.0 * std::numbers::pi) : 1.0; }

/// Power of the channel gain in the instantaneous SNR: gamma = gamma0 h^e.
inline double snr_exponent(Detection d) { return d == Detection::imdd ? 2.0 : 1.0; }

/// Pointing-error parameters from the receiver aperture radius, beam width
/// at the receiver and pointing displacement deviation (all in meters).
inline PointingError pointing_from_geometry(double r, double w_z, double sigma_s) {
    if (!(r > 0.0) || !(w_z > 0.0) || !(sigma_s > 0.0))
        throw DomainError("pointing_from_geometry: r, w_z and sigma_s must be positive");
    const double v = std::sqrt(std::numbers::pi / 2.0) * r / w_z;
    const double erf_v = specfun::erf(v);
    const double w_eq2 = w_z * w_z * std::sqrt(std::numbers::pi) * erf_v / (2.0 * v * std::exp(-v * v));
    return {w_eq2 / (4.0 * sigma_s * sigma_s), erf_v * erf_v};
}

/// Average electrical SNR gamma0: P_t^2 h_l^2 / sigma_w^2 for IM/DD,
/// P_t h_l / sigma_w^2 for heterodyne detection.
inline double average_snr(const LinkBudget& budget, Detection detection) {
    const double pt = budget.pt_watts();
    const double hl = budget.path_gain();
    return detection == Detection::imdd ? pt * pt * hl * hl / budget.sigma_w2 : pt * hl / budget.sigma_w2;
}

inline std::vector<Violation> validate_scenario(const LinkScenario& s) {
    std::vector<Violation> out;
    auto positive = [&](double v, const std::string& field) {
        if (!(v > 0.0) || !std::isfinite(v)) out.push_back({field, "must be a finite value > 0"});
    };
    if (s.layers.empty()) out.push_back({"layers", "at least one layer is required"});
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        const std::string base = "layers[" + std::to_string(i) + "].";
        positive(s.layers[i].a, base + "a");
        positive(s.layers[i].d, base + "d");
        positive(s.layers[i].p, base + "p");
    }
    positive(s.pointing.rho2, "pointing.rho2");
    if (!(s.pointing.a0 > 0.0 && s.pointing.a0 <= 1.0))
        out.push_back({"pointing.a0", "must lie in (0, 1]"});
    if (!std::isfinite(s.budget.pt_dbm)) out.push_back({"budget.pt_dbm", "must be finite"});
    positive(s.budget.sigma_w2, "budget.sigma_w2");
    if (!(s.budget.alpha >= 0.0) || !std::isfinite(s.budget.alpha))
        out.push_back({"budget.alpha", "must be a finite value >= 0"});
    positive(s.budget.length_m, "budget.length_m");
    positive(s.modulation.delta, "modulation.delta");
    positive(s.modulation.phi, "modulation.phi");
    if (s.modulation.q.empty()) out.push_back({"modulation.q", "at least one q_n is required"});
    for (std::size_t i = 0; i < s.modulation.q.size(); ++i)
        positive(s.modulation.q[i], "modulation.q[" + std::to_string(i) + "]");
    return out;
}

inline void require_valid(const LinkScenario& s) {
    auto violations = validate_scenario(s);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

/// The five-layer scenario of the measurement-based parameter table, with
/// rho2 = 1 and the given transmit power.
inline LinkScenario table1_scenario(double rho2 = 1.0, double pt_dbm = 30.0) {
    LinkScenario s;
    const double a[] = {0.6302, 1.0750, 1.0173, 0.7598, 1.0990};
    const double d[] = {1.1780, 3.2048, 1.6668, 2.3270, 4.5550};
    const double p[] = {0.8444, 2.9222, 1.0380, 1.4353, 4.6208};
    for (int i = 0; i < 5; ++i) s.layers.push_back({a[i], d[i], p[i]});
    s.pointing = {rho2, 0.0032};
    s.budget = {pt_dbm, 1e-14, 0.056, 50.0};
    s.modulation = ModulationScheme::ook();
    s.detection = Detection::imdd;
    return s;
}

}  // namespace uwoc
