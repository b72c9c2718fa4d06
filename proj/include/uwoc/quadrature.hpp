#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace uwoc {

/// Adaptive Gauss-Kronrod integral of f over [lo, hi] (0 < lo < hi) after
/// the substitution x = e^u, suited to densities spread over many decades.
/// The u-range is cut into unit panels so narrow peaks are not skipped; each
/// panel is refined to rel_tol of the whole integral, not of itself.
template <class F>
double integrate_log_scale(F&& f, double lo, double hi, double rel_tol = 1e-10, double* error = nullptr) {
    using boost::math::quadrature::gauss_kronrod;
    auto g = [&](double u) {
        const double x = std::exp(u);
        return f(x) * x;
    };
    const double u0 = std::log(lo), u1 = std::log(hi);
    const int panels = std::max(1, static_cast<int>(std::ceil(u1 - u0)));
    const double w = (u1 - u0) / panels;

    std::vector<double> coarse(panels);
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        coarse[i] = gauss_kronrod<double, 31>::integrate(g, u0 + i * w, u0 + (i + 1) * w, 0);
        total += std::abs(coarse[i]);
    }
    double sum = 0.0, err_sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double tol = std::min(0.5, rel_tol * std::max(1.0, total / std::max(std::abs(coarse[i]), 1e-300)));
        double err = 0.0;
        sum += gauss_kronrod<double, 31>::integrate(g, u0 + i * w, u0 + (i + 1) * w, 12, tol, &err);
        err_sum += err;
    }
    if (error) *error = err_sum;
    return sum;
}

}  // namespace uwoc
