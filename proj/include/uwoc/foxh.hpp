#pragma once

// Numerical Fox H-function for real positive argument.
//
//   H^{m,n}_{p,q}[z] = (1/2 pi i) * integral over L of chi(s) z^{-s} ds
//
//   chi(s) = prod_{j<m} Gamma(b_j + beta_j s) prod_{j<n} Gamma(1 - a_j - alpha_j s)
//          / (prod_{j>=m} Gamma(1 - b_j - beta_j s) prod_{j>=n} Gamma(a_j + alpha_j s))
//
// Evaluation: a vertical line Re(s) = c is integrated with the trapezoidal
// rule, which converges geometrically for integrands analytic in a strip
// around the line. The line starts in the analytic strip between the two pole
// families. For very small (large) z it is moved left (right) across pole
// clusters, and the residue of each crossed cluster is added back. Residues
// are computed by trapezoidal integration on a small circle, so coincident
// or nearly coincident poles need no special casing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "uwoc/error.hpp"
#include "uwoc/specfun.hpp"

namespace uwoc::specfun {

/// One (shift, scale) pair of an H-function parameter row, i.e. (a_j, alpha_j)
/// in the upper row or (b_j, beta_j) in the lower row.
struct FoxHParam {
    double shift;
    double scale;
};

class FoxHKernel {
public:
    FoxHKernel(std::vector<FoxHParam> upper, std::vector<FoxHParam> lower, std::size_t m, std::size_t n)
        : upper_(std::move(upper)), lower_(std::move(lower)), m_(m), n_(n) {
        if (m_ > lower_.size()) throw DomainError("FoxHKernel: m exceeds the number of lower parameters");
        if (n_ > upper_.size()) throw DomainError("FoxHKernel: n exceeds the number of upper parameters");
        for (const auto& row : {std::cref(upper_), std::cref(lower_)}) {
            for (const auto& prm : row.get()) {
                if (!(prm.scale > 0.0) || !std::isfinite(prm.scale) || !std::isfinite(prm.shift))
                    throw DomainError("FoxHKernel: scales must be positive and finite");
            }
        }
        strip_lo_ = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m_; ++j) strip_lo_ = std::max(strip_lo_, left_pole(j, 0));
        strip_hi_ = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_; ++j) strip_hi_ = std::min(strip_hi_, right_pole(j, 0));
        if (!(strip_lo_ < strip_hi_))
            throw EmptyStripError("FoxHKernel: pole families overlap, no analytic strip (" +
                                  std::to_string(strip_lo_) + " >= " + std::to_string(strip_hi_) + ")");
    }

    const std::vector<FoxHParam>& upper() const noexcept { return upper_; }
    const std::vector<FoxHParam>& lower() const noexcept { return lower_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t n() const noexcept { return n_; }

    /// Supremum of the poles of the Gamma(b_j + beta_j s) factors.
    double strip_lower() const noexcept { return strip_lo_; }
    /// Infimum of the poles of the Gamma(1 - a_j - alpha_j s) factors.
    double strip_upper() const noexcept { return strip_hi_; }

    /// k-th pole of the j-th lower numerator factor.
    double left_pole(std::size_t j, std::size_t k) const {
        return -(lower_[j].shift + static_cast<double>(k)) / lower_[j].scale;
    }
    /// k-th pole of the j-th upper numerator factor.
    double right_pole(std::size_t j, std::size_t k) const {
        return (1.0 - upper_[j].shift + static_cast<double>(k)) / upper_[j].scale;
    }

    /// Exponential decay rate of |chi(c + it)| in |t|, in units of pi/2.
    double decay_rate() const noexcept {
        double a = 0.0;
        for (std::size_t j = 0; j < upper_.size(); ++j) a += (j < n_ ? 1.0 : -1.0) * upper_[j].scale;
        for (std::size_t j = 0; j < lower_.size(); ++j) a += (j < m_ ? 1.0 : -1.0) * lower_[j].scale;
        return a;
    }

    /// ln chi(s), defined modulo 2 pi i. Real part is -inf where a
    /// denominator Gamma has a pole.
    complex log_mellin(complex s) const {
        complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < lower_.size(); ++j) {
            const complex u = lower_[j].shift + lower_[j].scale * s;
            acc += j < m_ ? ln_gamma_complex(u) : ln_reciprocal_gamma(1.0 - u);
        }
        for (std::size_t j = 0; j < upper_.size(); ++j) {
            const complex u = upper_[j].shift + upper_[j].scale * s;
            acc += j < n_ ? ln_gamma_complex(1.0 - u) : ln_reciprocal_gamma(u);
        }
        return acc;
    }

    /// Crude bound on |d/ds ln chi| near Re(s) = c, used to size the quadrature step.
    double log_derivative_scale(double c) const {
        double g = 1.0;
        for (const auto& prm : lower_) g += prm.scale * std::log(2.0 + std::abs(prm.shift + prm.scale * c));
        for (const auto& prm : upper_) g += prm.scale * std::log(2.0 + std::abs(prm.shift + prm.scale * c));
        return g;
    }

    /// Relative rounding noise of exp(log_mellin) near Re(s) = c, in units of machine epsilon.
    double rounding_scale(double c) const {
        double g = 1.0;
        for (const auto& prm : lower_) {
            const double u = std::abs(prm.shift + prm.scale * c);
            g += u * std::log(2.0 + u);
        }
        for (const auto& prm : upper_) {
            const double u = std::abs(prm.shift + prm.scale * c);
            g += u * std::log(2.0 + u);
        }
        return g;
    }

private:
    std::vector<FoxHParam> upper_;
    std::vector<FoxHParam> lower_;
    std::size_t m_;
    std::size_t n_;
    double strip_lo_;
    double strip_hi_;
};

struct FoxHOptions {
    /// Refinement agreement required of the line integral, relative to the result.
    double rel_tol = 1e-10;
    /// Multiplies the automatically chosen trapezoid step.
    double step_scale = 1.0;
    /// Multiplies the automatically chosen truncation point of the contour.
    double truncation_scale = 1.0;
    /// Allow moving the contour across pole clusters.
    bool cross_poles = true;
    std::size_t max_crossings = 40;
};

/// Evaluation diagnostics. `value` = `line_value` + `residue_sum`.
struct FoxHResult {
    double value = 0.0;
    double line_value = 0.0;
    double residue_sum = 0.0;
    double contour = 0.0;
    double step = 0.0;
    double truncation = 0.0;
    double refinement_delta = 0.0;
    std::size_t points = 0;
    std::size_t crossed_left = 0;
    std::size_t crossed_right = 0;
};

namespace detail {

inline constexpr double kClusterGap = 0.05;

struct Cluster {
    double near;  // pole closest to the strip
    double far;   // pole farthest from the strip
    double center() const { return 0.5 * (near + far); }
    double half_span() const { return 0.5 * std::abs(far - near); }
};

// Clusters of the first poles of one family, ordered away from the strip.
// `direction` is -1 for the left family and +1 for the right family.
inline std::vector<Cluster> pole_clusters(const FoxHKernel& kernel, int direction, std::size_t count) {
    std::vector<double> poles;
    const std::size_t factors = direction < 0 ? kernel.m() : kernel.n();
    for (std::size_t j = 0; j < factors; ++j) {
        for (std::size_t k = 0; k <= count + 1; ++k)
            poles.push_back(direction < 0 ? kernel.left_pole(j, k) : kernel.right_pole(j, k));
    }
    if (direction < 0) std::sort(poles.begin(), poles.end(), std::greater<>());
    else std::sort(poles.begin(), poles.end());

    std::vector<Cluster> out;
    for (double p : poles) {
        if (!out.empty() && std::abs(p - out.back().far) < kClusterGap) out.back().far = p;
        else out.push_back({p, p});
        if (out.size() > count + 1) {
            out.pop_back();
            break;
        }
    }
    return out;
}

struct Gap {
    double lo;
    double hi;
};

struct ContourPoint {
    double c;
    double phi;  // ln |chi(c) z^-c|
    bool at_lo;
    bool at_hi;
};

inline double log_magnitude(const FoxHKernel& kernel, double ln_z, double c) {
    const double v = kernel.log_mellin(complex{c, 0.0}).real() - c * ln_z;
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

// Minimize ln|chi(c) z^-c| over the interior of a gap, keeping a margin from the poles.
inline ContourPoint best_contour(const FoxHKernel& kernel, double ln_z, Gap gap) {
    double lo, hi;
    const bool lo_inf = !std::isfinite(gap.lo);
    const bool hi_inf = !std::isfinite(gap.hi);
    if (!lo_inf && !hi_inf) {
        const double w = gap.hi - gap.lo;
        lo = gap.lo + 0.25 * w;
        hi = gap.hi - 0.25 * w;
    } else if (lo_inf && hi_inf) {
        lo = -50.0;
        hi = 50.0;
    } else if (lo_inf) {
        hi = gap.hi - 0.5;
        lo = gap.hi - 200.0;
    } else {
        lo = gap.lo + 0.5;
        hi = gap.lo + 200.0;
    }

    constexpr int grid = 24;
    double best_c = lo;
    double best_v = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= grid; ++i) {
        const double c = lo + (hi - lo) * i / grid;
        const double v = log_magnitude(kernel, ln_z, c);
        if (v < best_v) {
            best_v = v;
            best_c = c;
            best_i = i;
        }
    }
    double a = lo + (hi - lo) * std::max(best_i - 1, 0) / grid;
    double b = lo + (hi - lo) * std::min(best_i + 1, grid) / grid;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = log_magnitude(kernel, ln_z, x1), f2 = log_magnitude(kernel, ln_z, x2);
    for (int it = 0; it < 48; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = log_magnitude(kernel, ln_z, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = log_magnitude(kernel, ln_z, x2);
        }
    }
    const double c = 0.5 * (a + b);
    const double v = log_magnitude(kernel, ln_z, c);
    if (v < best_v) {
        best_v = v;
        best_c = c;
    }
    const double edge = 1e-3 * (hi - lo);
    return {best_c, best_v, best_c - lo < edge, hi - best_c < edge};
}

inline complex integrand(const FoxHKernel& kernel, double ln_z, complex s) {
    const complex e = kernel.log_mellin(s) - s * ln_z;
    if (e.real() == -std::numeric_limits<double>::infinity()) return {0.0, 0.0};
    return std::exp(e);
}

// Residue sum of the poles inside a circle, by the trapezoidal rule on the circle.
inline double circle_residue(const FoxHKernel& kernel, double ln_z, double center, double radius) {
    const double noise = std::max(kernel.rounding_scale(center - radius), kernel.rounding_scale(center + radius));
    auto sweep = [&](std::size_t nodes, double& scale) {
        complex acc{0.0, 0.0};
        scale = 0.0;
        for (std::size_t k = 0; k < nodes / 2; ++k) {
            const double theta = std::numbers::pi * (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(nodes);
            const complex offset = std::polar(radius, theta);
            const complex term = integrand(kernel, ln_z, center + offset) * offset;
            scale = std::max(scale, std::abs(term));
            acc += term;
        }
        return 2.0 * acc.real() / static_cast<double>(nodes);
    };
    double scale = 0.0;
    double prev = sweep(32, scale);
    for (std::size_t nodes = 64; nodes <= 8192; nodes *= 2) {
        const double cur = sweep(nodes, scale);
        if (std::abs(cur - prev) <= 1e-13 * std::abs(cur) + 64.0 * std::numeric_limits<double>::epsilon() * noise * scale)
            return cur;
        prev = cur;
    }
    throw NonConvergenceError("foxh_eval: residue circle quadrature did not converge at s = " + std::to_string(center));
}

struct LineSum {
    double sum = 0.0;   // sum of Re f over nodes
    double l1 = 0.0;    // sum of |f| over nodes
    double f0 = 0.0;    // Re f at the first node
    double t_end = 0.0;
    std::size_t nodes = 0;
};

inline LineSum line_sum(const FoxHKernel& kernel, double ln_z, double c, double offset, double h,
                        double truncation_scale) {
    constexpr std::size_t kMaxNodes = 2'000'000;
    LineSum out;
    double peak = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    double t_stop = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0;; ++k) {
        const double t = offset + h * static_cast<double>(k);
        if (t > t_stop) break;
        const complex f = integrand(kernel, ln_z, complex{c, t});
        const double mag = std::abs(f);
        if (k == 0) out.f0 = f.real();
        out.sum += f.real();
        out.l1 += mag;
        out.t_end = t;
        ++out.nodes;
        peak = std::max(peak, mag);
        if (!std::isfinite(t_stop) && k >= 4 && mag <= prev_mag && mag <= 1e-18 * peak)
            t_stop = t * truncation_scale;
        prev_mag = mag;
        if (out.nodes > kMaxNodes) throw NonConvergenceError("foxh_eval: contour integrand does not decay");
    }
    return out;
}

}  // namespace detail

/// Evaluate H^{m,n}_{p,q}[z] for z > 0, returning diagnostics.
inline FoxHResult foxh_evaluate(const FoxHKernel& kernel, double z, const FoxHOptions& opts = {}) {
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("foxh_eval: argument must be positive and finite");
    if (!(kernel.decay_rate() > 0.0))
        throw NonConvergenceError("foxh_eval: kernel integrand does not decay along vertical lines");

    const double ln_z = std::log(z);
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t max_cross = opts.cross_poles ? opts.max_crossings : 0;
    const auto left = detail::pole_clusters(kernel, -1, max_cross);
    const auto right = detail::pole_clusters(kernel, +1, max_cross);

    auto gap_at = [&](int index) -> detail::Gap {
        // index 0 is the strip, negative indices lie left of it, positive right.
        if (index == 0) return {kernel.strip_lower(), kernel.strip_upper()};
        if (index < 0) {
            const auto k = static_cast<std::size_t>(-index);
            return {k < left.size() ? left[k].near : -inf, left[k - 1].far};
        }
        const auto k = static_cast<std::size_t>(index);
        return {right[k - 1].far, k < right.size() ? right[k].near : inf};
    };
    auto nearest_outside = [&](const std::vector<detail::Cluster>& family, std::size_t k,
                               const std::vector<detail::Cluster>& other) {
        const double center = family[k].center();
        double d = inf;
        if (k > 0) d = std::min(d, std::abs(center - family[k - 1].far));
        if (k + 1 < family.size()) d = std::min(d, std::abs(family[k + 1].near - center));
        if (!other.empty()) d = std::min(d, std::abs(other.front().near - center));
        return d;
    };
    auto residue_of = [&](const std::vector<detail::Cluster>& family, std::size_t k,
                          const std::vector<detail::Cluster>& other) {
        const double inner = family[k].half_span();
        const double outer = nearest_outside(family, k, other);
        const double margin =
            std::min(0.5 * (outer - inner), std::max(2.0 * inner, 1.0 / std::max(1.0, std::abs(ln_z))));
        return detail::circle_residue(kernel, ln_z, family[k].center(), inner + margin);
    };

    detail::Gap gap = gap_at(0);
    detail::ContourPoint point = detail::best_contour(kernel, ln_z, gap);
    FoxHResult result;

    // Move the contour across pole clusters while that shrinks the integrand.
    const int direction = point.at_lo && !left.empty() ? -1 : (point.at_hi && !right.empty() ? 1 : 0);
    if (direction != 0) {
        const auto& family = direction < 0 ? left : right;
        const auto& other = direction < 0 ? right : left;
        for (std::size_t k = 1; k <= max_cross && k < family.size(); ++k) {
            const detail::Gap next_gap = gap_at(direction * static_cast<int>(k));
            const detail::ContourPoint next = detail::best_contour(kernel, ln_z, next_gap);
            if (!(next.phi < point.phi - 1.0)) break;
            const double res = residue_of(family, k - 1, other);
            result.residue_sum += direction < 0 ? res : -res;
            (direction < 0 ? result.crossed_left : result.crossed_right) = k;
            gap = next_gap;
            point = next;
            if (std::abs(result.residue_sum) > 0.0 &&
                point.phi < std::log(1e-18 * std::abs(result.residue_sum)))
                break;
        }
    }

    const double c = point.c;
    const double noise = kernel.rounding_scale(c);
    const double dist = std::min(c - gap.lo, gap.hi - c);
    double h = std::isfinite(dist)
                   ? 2.0 * std::numbers::pi * dist /
                         (36.0 + dist * (std::abs(ln_z) + kernel.log_derivative_scale(c)))
                   : 2.0 * std::numbers::pi / (std::abs(ln_z) + kernel.log_derivative_scale(c));
    h = std::min(h, 1.0) * opts.step_scale;

    const double scale = 1.0 / std::numbers::pi;
    detail::LineSum base = detail::line_sum(kernel, ln_z, c, 0.0, h, opts.truncation_scale);
    double coarse = scale * h * (base.sum - 0.5 * base.f0);
    double l1 = base.l1 * h;
    std::size_t points = base.nodes;
    for (int refinement = 0;; ++refinement) {
        const detail::LineSum mid = detail::line_sum(kernel, ln_z, c, 0.5 * h, h, opts.truncation_scale);
        const double fine = 0.5 * coarse + scale * 0.5 * h * mid.sum;
        points += mid.nodes;
        l1 = 0.5 * (l1 + mid.l1 * h);
        const double delta = std::abs(fine - coarse);
        const double total = fine + result.residue_sum;
        const double tol =
            std::max(opts.rel_tol * std::abs(total), 256.0 * std::numeric_limits<double>::epsilon() * noise * scale * l1);
        if (delta <= tol) {
            result.line_value = fine;
            result.value = total;
            result.refinement_delta = delta;
            result.truncation = std::max(base.t_end, mid.t_end);
            break;
        }
        if (refinement >= 6)
            throw NonConvergenceError("foxh_eval: contour quadrature refinements disagree (" + std::to_string(delta) +
                                      " > " + std::to_string(tol) + ") at z = " + std::to_string(z));
        coarse = fine;
        h *= 0.5;
    }
    result.contour = c;
    result.step = 0.5 * h;
    result.points = points;
    return result;
}

inline double foxh_eval(const FoxHKernel& kernel, double z, const FoxHOptions& opts = {}) {
    return foxh_evaluate(kernel, z, opts).value;
}

}  // namespace uwoc::specfun
