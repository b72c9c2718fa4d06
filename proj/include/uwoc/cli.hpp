#pragma once

// Command-line front end: sweeps to CSV, desk-scale self-check, diversity report.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uwoc/config.hpp"
#include "uwoc/mc.hpp"
#include "uwoc/metrics.hpp"
#include "uwoc/quadrature.hpp"

namespace uwoc::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kParse = 2,
    kValidation = 3,
    kNumerical = 4,
    kIo = 5,
    kCheckFailed = 6,
};

class UsageError : public Error {
public:
    using Error::Error;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

enum class SweepVariable { pt_dbm, gamma0_db };

struct SweepSpec {
    SweepVariable variable = SweepVariable::pt_dbm;
    double start = 0.0;
    double stop = 0.0;
    int points = 2;
    bool log_spaced = false;
    bool outage = false, ber = false, capacity = false;
    bool exact = false, asymptotic = false, mc = false;
    std::optional<double> gamma_th;
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t streams = 8;
    std::size_t threads = 0;

    std::vector<double> values() const {
        std::vector<double> out;
        for (int i = 0; i < points; ++i) {
            const double t = static_cast<double>(i) / (points - 1);
            out.push_back(log_spaced ? start * std::pow(stop / start, t) : start + t * (stop - start));
        }
        out.back() = stop;
        return out;
    }
};

namespace detail {

inline double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw UsageError("invalid " + what + " '" + text + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace detail

/// Parses "<var>=<start>:<stop>:<points>[:log]" into spec.
inline void parse_sweep_arg(const std::string& arg, SweepSpec& spec) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw UsageError("--sweep expects <var>=<start>:<stop>:<points>[:log]");
    const std::string var = arg.substr(0, eq);
    if (var == "pt_dbm") spec.variable = SweepVariable::pt_dbm;
    else if (var == "gamma0_db") spec.variable = SweepVariable::gamma0_db;
    else throw UsageError("unknown sweep variable '" + var + "' (expected pt_dbm or gamma0_db)");
    const auto parts = detail::split(arg.substr(eq + 1), ':');
    if (parts.size() != 3 && parts.size() != 4) throw UsageError("--sweep expects <var>=<start>:<stop>:<points>[:log]");
    spec.start = detail::parse_number(parts[0], "sweep start");
    spec.stop = detail::parse_number(parts[1], "sweep stop");
    const double pts = detail::parse_number(parts[2], "sweep point count");
    if (pts != std::floor(pts) || pts > 1e6) throw UsageError("sweep point count must be an integer");
    spec.points = static_cast<int>(pts);
    spec.log_spaced = false;
    if (parts.size() == 4) {
        if (parts[3] != "log") throw UsageError("unknown sweep spacing '" + parts[3] + "' (expected log)");
        spec.log_spaced = true;
    }
}

inline void parse_metrics_arg(const std::string& arg, SweepSpec& spec) {
    spec.outage = spec.ber = spec.capacity = false;
    for (const auto& m : detail::split(arg, ',')) {
        if (m == "outage") spec.outage = true;
        else if (m == "ber") spec.ber = true;
        else if (m == "capacity") spec.capacity = true;
        else throw UsageError("unknown metric '" + m + "' (expected outage, ber, capacity)");
    }
}

inline void parse_modes_arg(const std::string& arg, SweepSpec& spec) {
    spec.exact = spec.asymptotic = spec.mc = false;
    for (const auto& m : detail::split(arg, ',')) {
        if (m == "exact") spec.exact = true;
        else if (m == "asymptotic") spec.asymptotic = true;
        else if (m == "mc") spec.mc = true;
        else throw UsageError("unknown mode '" + m + "' (expected exact, asymptotic, mc)");
    }
}

inline void check_sweep(const SweepSpec& spec) {
    if (!(spec.start < spec.stop)) throw UsageError("sweep start must be below stop");
    if (spec.points < 2) throw UsageError("sweep needs at least 2 points");
    if (spec.log_spaced && !(spec.start > 0.0)) throw UsageError("log-spaced sweep needs a positive start");
    if (!spec.outage && !spec.ber && !spec.capacity) throw UsageError("select at least one metric");
    if (!spec.exact && !spec.asymptotic && !spec.mc) throw UsageError("select at least one mode");
    if (spec.outage && !spec.gamma_th) throw UsageError("--gamma-th is required when outage is selected");
    if (spec.gamma_th && !(*spec.gamma_th > 0.0)) throw UsageError("--gamma-th must be positive");
    if (spec.mc && spec.mc_samples < mc::kMinSamples) throw UsageError("--samples must be at least 1000");
    if (spec.streams == 0) throw UsageError("--streams must be at least 1");
}

/// gamma0 for one sweep value.
inline double sweep_gamma0(const LinkScenario& s, SweepVariable var, double value) {
    if (var == SweepVariable::gamma0_db) return std::pow(10.0, value / 10.0);
    LinkBudget b = s.budget;
    b.pt_dbm = value;
    return average_snr(b, s.detection);
}

namespace detail {

struct Row {
    double sweep_value;
    double gamma0;
    // per metric: exact, asymptotic, mc, mc_stderr
    std::vector<std::optional<double>> cells;
    std::vector<std::string> errors;
};

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

template <class F>
void record(Row& row, std::size_t cell, const char* label, F&& f) {
    try {
        row.cells[cell] = f();
    } catch (const std::exception& e) {
        const std::string what = e.what();
        const std::string prefix = std::string(label) + ": ";
        row.errors.push_back(what.starts_with(prefix) ? what : prefix + what);
    }
}

}  // namespace detail

/// Evaluates the sweep and returns the CSV text. Per-point failures become
/// empty cells plus a message in the error column. Warnings from the Monte
/// Carlo estimator are appended to *warnings when given.
inline std::string run_sweep(const LinkScenario& scenario, const SweepSpec& spec,
                             std::vector<std::string>* warnings = nullptr) {
    check_sweep(spec);
    require_valid(scenario);
    struct MetricCols {
        const char* name;
        bool on;
    };
    const MetricCols metrics_on[] = {{"outage", spec.outage}, {"ber", spec.ber}, {"capacity", spec.capacity}};
    std::vector<const char*> names;
    for (const auto& m : metrics_on)
        if (m.on) names.push_back(m.name);

    const auto values = spec.values();
    std::vector<double> gamma0s;
    for (double v : values) gamma0s.push_back(sweep_gamma0(scenario, spec.variable, v));

    std::vector<detail::Row> rows;
    for (std::size_t i = 0; i < values.size(); ++i)
        rows.push_back({values[i], gamma0s[i], std::vector<std::optional<double>>(4 * names.size()), {}});

    const double gamma_th = spec.gamma_th.value_or(1.0);
    if (warnings && scenario.detection != Detection::imdd && spec.outage && (spec.exact || spec.asymptotic))
        warnings->push_back("outage analytic columns use the IM/DD form extended to detection=" +
                            std::string(to_string(scenario.detection)) + " (extension)");
    for (auto& row : rows) {
        std::optional<stats::SnrDistribution> dist;
        if (spec.exact || spec.asymptotic) {
            try {
                dist.emplace(scenario, row.gamma0);
            } catch (const std::exception& e) {
                row.errors.push_back(std::string("distribution: ") + e.what());
            }
        }
        for (std::size_t m = 0; m < names.size(); ++m) {
            const std::string name = names[m];
            if (!dist) break;
            if (spec.exact) {
                const std::string label = name + "_exact";
                if (name == "outage") detail::record(row, 4 * m, label.c_str(), [&] { return metrics::outage_exact(*dist, gamma_th); });
                if (name == "ber") detail::record(row, 4 * m, label.c_str(), [&] { return metrics::ber_exact(*dist); });
                if (name == "capacity") detail::record(row, 4 * m, label.c_str(), [&] { return metrics::capacity_exact(*dist); });
            }
            if (spec.asymptotic) {
                const std::string label = name + "_asymptotic";
                if (name == "outage")
                    detail::record(row, 4 * m + 1, label.c_str(), [&] { return metrics::outage_asymptotic(*dist, gamma_th).value; });
                if (name == "ber")
                    detail::record(row, 4 * m + 1, label.c_str(), [&] { return metrics::ber_asymptotic(*dist).value; });
                // capacity has no high-SNR expansion; the cell stays empty
            }
        }
    }

    if (spec.mc) {
        mc::McOptions opts;
        opts.seed = spec.seed;
        opts.n_samples = spec.mc_samples;
        opts.streams = spec.streams;
        opts.threads = spec.threads;
        const mc::SweepRequest req{spec.outage, spec.ber, spec.capacity, gamma_th};
        try {
            const auto est = mc::estimate_sweep(scenario, gamma0s, req, opts);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t m = 0; m < names.size(); ++m) {
                    const std::string name = names[m];
                    const auto& e = name == "outage" ? est[i].outage : name == "ber" ? est[i].ber : est[i].capacity;
                    rows[i].cells[4 * m + 2] = e->value;
                    rows[i].cells[4 * m + 3] = e->std_error;
                    if (warnings)
                        for (const auto& w : e->warnings)
                            warnings->push_back(format_double(rows[i].sweep_value) + " " + name + "_mc: " + w);
                }
            }
        } catch (const std::exception& e) {
            for (auto& row : rows) row.errors.push_back(std::string("mc: ") + e.what());
        }
    }

    std::ostringstream out;
    out << "sweep_value,gamma0_db";
    for (const char* n : names) out << ',' << n << "_exact," << n << "_asymptotic," << n << "_mc," << n << "_mc_stderr";
    out << ",error\n";
    for (const auto& row : rows) {
        out << format_double(row.sweep_value) << ',' << format_double(10.0 * std::log10(row.gamma0));
        for (const auto& c : row.cells) {
            out << ',';
            if (c) out << format_double(*c);
        }
        std::string err;
        for (const auto& e : row.errors) err += (err.empty() ? "" : "; ") + e;
        out << ',' << detail::csv_quote(err) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Desk-scale self-check

struct CheckResult {
    enum class Status { pass, fail, skip } status;
    std::string name;
    std::string detail;
};

inline std::string to_string(const CheckResult& r) {
    const char* tag = r.status == CheckResult::Status::pass ? "PASS" : r.status == CheckResult::Status::fail ? "FAIL" : "SKIP";
    return std::string(tag) + "  " + r.name + (r.detail.empty() ? "" : "  (" + r.detail + ")");
}

namespace detail {

inline CheckResult verdict(std::string name, bool ok, std::string detail) {
    return {ok ? CheckResult::Status::pass : CheckResult::Status::fail, std::move(name), std::move(detail)};
}

inline std::string sigma_detail(double exact, const mc::MetricEstimate& e) {
    const double z = e.std_error > 0 ? std::abs(e.value - exact) / e.std_error : (e.value == exact ? 0.0 : INFINITY);
    std::ostringstream s;
    s << "exact " << exact << ", mc " << e.value << " +/- " << e.std_error << ", " << z << " sigma";
    return s.str();
}

inline bool within_sigma(double exact, const mc::MetricEstimate& e, double k) {
    return std::abs(e.value - exact) <= k * e.std_error;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

template <class F>
void guarded(std::vector<CheckResult>& out, const std::string& name, F&& f) {
    try {
        out.push_back(f());
    } catch (const PoleCollisionError& e) {
        out.push_back({CheckResult::Status::skip, name, std::string("pole collision: ") + e.what()});
    } catch (const UnsupportedError& e) {
        out.push_back({CheckResult::Status::skip, name, e.what()});
    } catch (const std::exception& e) {
        out.push_back({CheckResult::Status::fail, name, e.what()});
    }
}

}  // namespace detail

/// gamma0 used by the self-check: mid-range transmit power when a range is
/// given, else the scenario's transmit power.
inline double check_gamma0(const ScenarioConfig& cfg) {
    LinkBudget b = cfg.scenario.budget;
    if (cfg.pt_dbm_range) b.pt_dbm = 0.5 * ((*cfg.pt_dbm_range)[0] + (*cfg.pt_dbm_range)[1]);
    return average_snr(b, cfg.scenario.detection);
}

/// Reduction identities and analytic-vs-Monte-Carlo consistency for one scenario.
inline std::vector<CheckResult> self_check(const ScenarioConfig& cfg, std::size_t samples = 100'000,
                                           std::uint64_t seed = 1, std::size_t streams = 8) {
    using detail::guarded;
    using detail::verdict;
    const LinkScenario& s = cfg.scenario;
    require_valid(s);
    std::vector<CheckResult> out;
    const double gamma0 = check_gamma0(cfg);
    mc::McOptions opts;
    opts.n_samples = samples;
    opts.seed = seed;
    opts.streams = streams;
    constexpr double k_sigma = 3.0;

    guarded(out, "identity: H^{1,0}_{0,1}(z) = exp(-z)", [&] {
        const specfun::FoxHKernel k({}, {{0.0, 1.0}}, 1, 0);
        double worst = 0.0;
        for (double z : {0.01, 0.1, 1.0, 5.0, 20.0}) worst = std::max(worst, std::abs(specfun::foxh_eval(k, z) * std::exp(z) - 1.0));
        return verdict("identity: H^{1,0}_{0,1}(z) = exp(-z)", worst < 1e-8, "max rel err " + format_double(worst));
    });
    guarded(out, "identity: H^{2,0}_{0,2}(z) = 2 K0(2 sqrt z)", [&] {
        const specfun::FoxHKernel k({}, {{0.0, 1.0}, {0.0, 1.0}}, 2, 0);
        double worst = 0.0;
        for (double z : {0.01, 0.1, 1.0, 5.0, 10.0})
            worst = std::max(worst, std::abs(specfun::foxh_eval(k, z) / (2.0 * specfun::bessel_k0(2.0 * std::sqrt(z))) - 1.0));
        return verdict("identity: H^{2,0}_{0,2}(z) = 2 K0(2 sqrt z)", worst < 1e-8, "max rel err " + format_double(worst));
    });
    guarded(out, "reduction: single Gamma layer density", [&] {
        const std::vector<GGLayer> one{{0.8, 2.5, 1.0}};
        double worst = 0.0;
        for (double h : {0.01, 0.3, 1.0, 4.0, 10.0}) {
            const double want = std::exp(1.5 * std::log(h / 0.8) - h / 0.8 - std::lgamma(2.5)) / 0.8;
            worst = std::max(worst, std::abs(stats::pdf_cascade(one, h) / want - 1.0));
        }
        return verdict("reduction: single Gamma layer density", worst < 1e-8, "max rel err " + format_double(worst));
    });

    const stats::SnrDistribution dist(s, gamma0);
    const std::string at = " at gamma0 " + format_double(10.0 * std::log10(gamma0)) + " dB";

    guarded(out, "cdf derivative matches pdf", [&] {
        double worst = 0.0;
        for (double r : {1e-6, 1e-4, 1e-2}) {
            const double g = gamma0 * r, eps = 1e-4;
            const double dF = stats::cdf_snr(dist, g * std::exp(eps)) - stats::cdf_snr(dist, g * std::exp(-eps));
            worst = std::max(worst, std::abs(dF / (stats::pdf_snr(dist, g) * g * 2.0 * eps) - 1.0));
        }
        return verdict("cdf derivative matches pdf" + at, worst < 1e-4, "max rel err " + format_double(worst));
    });

    guarded(out, "moments", [&] {
        const std::vector<double> orders{1.0, 2.0};
        const auto est = mc::estimate_moments(s, orders, opts);
        bool ok = true;
        std::string detail;
        for (std::size_t j = 0; j < orders.size(); ++j) {
            const double want = stats::combined_moment(s.layers, s.pointing, orders[j]);
            ok = ok && detail::within_sigma(want, est[j], k_sigma);
            detail += (j ? "; " : "") + std::string("n=") + format_double(orders[j]) + ": " + detail::sigma_detail(want, est[j]);
        }
        return verdict("moments E[h^n] vs Monte Carlo", ok, detail);
    });

    guarded(out, "outage vs Monte Carlo", [&] {
        const double th = gamma0 * 1e-4;
        const double exact = metrics::outage_exact(dist, th);
        const auto e = mc::estimate_outage(s, gamma0, th, opts);
        return verdict("outage exact vs Monte Carlo" + at, detail::within_sigma(exact, e, k_sigma), detail::sigma_detail(exact, e));
    });
    guarded(out, "ber exact vs Monte Carlo", [&] {
        const double exact = metrics::ber_exact(dist);
        const auto e = mc::estimate_ber(s, gamma0, opts);
        return verdict("ber exact vs Monte Carlo" + at, detail::within_sigma(exact, e, k_sigma), detail::sigma_detail(exact, e));
    });
    guarded(out, "capacity exact vs Monte Carlo", [&] {
        const double exact = metrics::capacity_exact(dist);
        const auto e = mc::estimate_capacity(s, gamma0, opts);
        return verdict("capacity exact vs Monte Carlo" + at, detail::within_sigma(exact, e, k_sigma), detail::sigma_detail(exact, e));
    });
    guarded(out, "ber exact vs quadrature", [&] {
        const double exact = metrics::ber_exact(dist);
        ModulationScheme ook = ModulationScheme::ook();
        const double want = [&] {
            if (s.modulation.phi == ook.phi && s.modulation.delta == ook.delta && s.modulation.q == ook.q)
                return integrate_log_scale([&](double g) { return stats::pdf_snr(dist, g) * detail::q_function(std::sqrt(g)); },
                                           gamma0 * 1e-30, gamma0 * 1e4, 1e-9);
            double acc = 0.0;
            for (double q : s.modulation.q)
                acc += std::pow(q, s.modulation.phi) *
                       integrate_log_scale([&](double g) {
                           return std::pow(g, s.modulation.phi - 1.0) * std::exp(-q * g) * stats::cdf_snr(dist, g);
                       }, 1e-12 / q, 800.0 / q, 1e-9);
            return s.modulation.delta / (2.0 * std::tgamma(s.modulation.phi)) * acc;
        }();
        const double rel = std::abs(exact / want - 1.0);
        return verdict("ber exact vs quadrature" + at, rel < 1e-4, "rel err " + format_double(rel));
    });

    guarded(out, "outage asymptote", [&] {
        metrics::require_simple_poles(s);
        std::string detail;
        bool ok = true;
        int used = 0;
        for (int k = 0; k <= 10 && used < 2; ++k) {
            const stats::SnrDistribution d(s, gamma0 * std::pow(10.0, k));
            const double exact = metrics::outage_exact(d, 1.0);
            if (exact >= 1e-3) continue;
            const double ratio = metrics::outage_asymptotic(d, 1.0).value / exact;
            ok = ok && std::abs(ratio - 1.0) <= 0.05;
            detail += (used ? "; " : "") + std::string("ratio ") + format_double(ratio) + " at outage " + format_double(exact);
            ++used;
        }
        if (used == 0) return CheckResult{CheckResult::Status::skip, "outage asymptote", "no point with outage < 1e-3"};
        return verdict("outage asymptote within 5%", ok, detail);
    });
    guarded(out, "ber asymptote", [&] {
        metrics::require_simple_poles(s);
        std::string detail;
        bool ok = true;
        int used = 0;
        for (int k = 0; k <= 10 && used < 2; ++k) {
            const stats::SnrDistribution d(s, gamma0 * std::pow(10.0, k));
            const double exact = metrics::ber_exact(d);
            if (exact >= 1e-4) continue;
            const double ratio = metrics::ber_asymptotic(d).value / exact;
            ok = ok && std::abs(ratio - 1.0) <= 0.05;
            detail += (used ? "; " : "") + std::string("ratio ") + format_double(ratio) + " at ber " + format_double(exact);
            ++used;
        }
        if (used == 0) return CheckResult{CheckResult::Status::skip, "ber asymptote", "no point with ber < 1e-4"};
        return verdict("ber asymptote within 5%", ok, detail);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Diversity report

struct DiversityReport {
    metrics::DiversityReadings readings;
    double gamma0_lo_db;
    double gamma0_hi_db;
    std::optional<double> measured_slope;
    std::string slope_error;
};

/// Log-log slope of outage_exact (gamma_th = 1) over [gamma0_lo_db, gamma0_hi_db].
inline double measured_outage_slope(const LinkScenario& s, double gamma0_lo_db, double gamma0_hi_db) {
    const double lo = metrics::outage_exact(stats::SnrDistribution(s, std::pow(10.0, gamma0_lo_db / 10.0)), 1.0);
    const double hi = metrics::outage_exact(stats::SnrDistribution(s, std::pow(10.0, gamma0_hi_db / 10.0)), 1.0);
    if (!(lo > 0.0) || !(hi > 0.0)) throw NonConvergenceError("outage underflows on the slope interval");
    return -(std::log10(hi) - std::log10(lo)) / ((gamma0_hi_db - gamma0_lo_db) / 10.0);
}

/// The high-SNR decade ends at the top of the scenario's power range.
inline DiversityReport diversity_report(const ScenarioConfig& cfg, std::optional<double> top_gamma0_db = std::nullopt) {
    const LinkScenario& s = cfg.scenario;
    require_valid(s);
    DiversityReport r{metrics::diversity_readings(s), 0.0, 0.0, std::nullopt, {}};
    if (top_gamma0_db) {
        r.gamma0_hi_db = *top_gamma0_db;
    } else {
        LinkBudget b = s.budget;
        if (cfg.pt_dbm_range) b.pt_dbm = std::max((*cfg.pt_dbm_range)[0], (*cfg.pt_dbm_range)[1]);
        r.gamma0_hi_db = 10.0 * std::log10(average_snr(b, s.detection));
    }
    r.gamma0_lo_db = r.gamma0_hi_db - 10.0;
    try {
        r.measured_slope = measured_outage_slope(s, r.gamma0_lo_db, r.gamma0_hi_db);
    } catch (const std::exception& e) {
        r.slope_error = e.what();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {

inline ScenarioConfig load_with_overrides(const std::string& path, const std::optional<double>& rho2,
                                          const std::string& detection) {
    ScenarioConfig cfg = load_scenario_file(path);
    if (rho2) cfg.scenario.pointing.rho2 = *rho2;
    if (detection == "imdd") cfg.scenario.detection = Detection::imdd;
    else if (detection == "hd") cfg.scenario.detection = Detection::hd;
    else if (!detection.empty()) throw UsageError("--detection must be imdd or hd");
    return cfg;
}

}  // namespace detail

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cascaded generalized-Gamma underwater optical link: exact, asymptotic and Monte-Carlo metrics"};
    app.require_subcommand(1);

    std::string scenario_path, sweep_arg, metrics_arg = "outage,ber,capacity", modes_arg = "exact,asymptotic,mc";
    std::string out_path, detection;
    std::optional<double> rho2, gamma_th, top_db;
    std::size_t samples = 1'000'000, streams = 8, threads = 0;
    std::uint64_t seed = 1;
    bool samples_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
        sub->add_option("--rho2", rho2, "Override the pointing-error parameter rho2");
        sub->add_option("--detection", detection, "Override detection: imdd or hd");
    };

    CLI::App* sweep = app.add_subcommand("sweep", "Evaluate metrics over a transmit-power or SNR sweep and write CSV");
    add_common(sweep);
    sweep->add_option("--sweep", sweep_arg, "<pt_dbm|gamma0_db>=<start>:<stop>:<points>[:log]")->required();
    sweep->add_option("--metrics", metrics_arg, "Comma list of outage, ber, capacity");
    sweep->add_option("--modes", modes_arg, "Comma list of exact, asymptotic, mc");
    sweep->add_option("--gamma-th", gamma_th, "Outage threshold (linear SNR)");
    sweep->add_option("--samples", samples, "Monte-Carlo samples per point");
    sweep->add_option("--seed", seed, "Monte-Carlo seed");
    sweep->add_option("--streams", streams, "Monte-Carlo sub-streams (part of the reproducibility key)");
    sweep->add_option("--threads", threads, "Worker threads (0: all cores); does not change results");
    sweep->add_option("--out", out_path, "Output CSV path (default: stdout)");

    CLI::App* validate = app.add_subcommand("validate", "Run the desk-scale self-check on a scenario");
    add_common(validate);
    validate->add_option("--samples", samples, "Monte-Carlo samples per check")->each([&](const std::string&) { samples_set = true; });
    validate->add_option("--seed", seed, "Monte-Carlo seed");
    validate->add_option("--streams", streams, "Monte-Carlo sub-streams");

    CLI::App* diversity = app.add_subcommand("diversity", "Report the diversity order and the measured high-SNR slope");
    add_common(diversity);
    diversity->add_option("--gamma0-top-db", top_db, "Upper end of the slope decade (default: top of the power range)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        const ScenarioConfig cfg = detail::load_with_overrides(scenario_path, rho2, detection);
        if (*sweep) {
            SweepSpec spec;
            parse_sweep_arg(sweep_arg, spec);
            parse_metrics_arg(metrics_arg, spec);
            parse_modes_arg(modes_arg, spec);
            spec.gamma_th = gamma_th;
            spec.mc_samples = samples;
            spec.seed = seed;
            spec.streams = streams;
            spec.threads = threads;
            check_sweep(spec);
            require_valid(cfg.scenario);
            std::vector<std::string> warnings;
            const std::string csv = run_sweep(cfg.scenario, spec, &warnings);
            for (const auto& w : warnings) err << "warning: " << w << "\n";
            if (out_path.empty()) {
                out << csv;
            } else {
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw IoError("cannot open '" + out_path + "' for writing");
                f << csv;
                if (!f.flush()) throw IoError("failed writing '" + out_path + "'");
            }
            return kOk;
        }
        if (*validate) {
            const auto results = self_check(cfg, samples_set ? samples : 100'000, seed, streams);
            bool failed = false;
            for (const auto& r : results) {
                out << to_string(r) << "\n";
                failed = failed || r.status == CheckResult::Status::fail;
            }
            out << (failed ? "self-check FAILED\n" : "self-check passed\n");
            return failed ? kCheckFailed : kOk;
        }
        const auto r = diversity_report(cfg, top_db);
        out << "diversity_order (pole dominance, min of d_i/e and rho2/e): " << format_double(r.readings.pole_dominance) << "\n";
        out << "alternative reading, sum_i min(d_i, rho2)/e: " << format_double(r.readings.sum_of_minima) << "\n";
        out << "alternative reading, min(sum_i d_i, rho2)/e: " << format_double(r.readings.min_of_sum) << "\n";
        if (r.measured_slope)
            out << "measured outage slope over gamma0 " << format_double(r.gamma0_lo_db) << " .. "
                << format_double(r.gamma0_hi_db) << " dB (gamma_th = 1): " << format_double(*r.measured_slope) << "\n";
        else
            out << "measured outage slope unavailable: " << r.slope_error << "\n";
        return kOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace uwoc::cli
