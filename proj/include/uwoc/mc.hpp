#pragma once

// Monte-Carlo sampling of the cascaded channel and metric estimation.
//
// Work is split into S sub-streams. Stream k draws from a xoshiro256**
// generator seeded from the run seed and advanced by k jumps of 2^128, takes
// a fixed share of the samples and keeps its own accumulators. Streams are
// merged in index order, so results depend on (seed, n_samples, S) only and
// not on how many threads ran them.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "uwoc/channel.hpp"
#include "uwoc/error.hpp"

namespace uwoc::mc {

/// xoshiro256** 1.0 with the standard 2^128 jump.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        // splitmix64 expansion of the seed
        for (auto& s : s_) {
            seed += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    /// Raw state; must not be all zero.
    explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) : s_{state[0], state[1], state[2], state[3]} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    void jump() noexcept {
        static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                                  0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
        std::uint64_t acc[4] = {0, 0, 0, 0};
        for (std::uint64_t word : kJump) {
            for (int b = 0; b < 64; ++b) {
                if (word & (std::uint64_t{1} << b))
                    for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
                (*this)();
            }
        }
        for (int i = 0; i < 4; ++i) s_[i] = acc[i];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Standard normal by the Marsaglia polar method.
inline double sample_normal(Xoshiro256& rng) {
    for (;;) {
        const double u = 2.0 * rng.uniform() - 1.0;
        const double v = 2.0 * rng.uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

/// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses G(shape + 1) U^(1/shape).
inline double sample_gamma(double shape, Xoshiro256& rng) {
    if (!(shape > 0.0)) throw DomainError("sample_gamma: shape must be positive");
    if (shape < 1.0) return sample_gamma(shape + 1.0, rng) * std::pow(rng.uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = sample_normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

/// a G^(1/p) with G ~ Gamma(d/p, 1).
inline double sample_gg(const GGLayer& layer, Xoshiro256& rng) {
    const double g = sample_gamma(layer.d / layer.p, rng);
    return layer.p == 1.0 ? layer.a * g : layer.a * std::pow(g, 1.0 / layer.p);
}

/// Inverse-CDF pointing sample a0 u^(1/rho2) for u in [0, 1].
inline double sample_pointing(const PointingError& pe, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("sample_pointing: u must lie in [0, 1]");
    return pe.a0 * std::pow(u, 1.0 / pe.rho2);
}

/// Combined gain h = prod_i h_i * h_p.
inline double sample_gain(const LinkScenario& s, Xoshiro256& rng) {
    double h = sample_pointing(s.pointing, rng.uniform());
    for (const auto& l : s.layers) h *= sample_gg(l, rng);
    return h;
}

/// gamma = gamma0 h^e.
inline double sample_snr(const LinkScenario& s, double gamma0, Xoshiro256& rng) {
    const double h = sample_gain(s, rng);
    return s.detection == Detection::imdd ? gamma0 * (h * h) : gamma0 * h;
}

/// Draws gamma from the channel model.
struct ChannelSource {
    LinkScenario scenario;
    double gamma0;

    double operator()(Xoshiro256& rng) const { return sample_snr(scenario, gamma0, rng); }
};

/// A deterministic SNR, for checking estimators against their formulas.
struct ConstantSource {
    double gamma;

    double operator()(Xoshiro256&) const { return gamma; }
};

struct McOptions {
    std::uint64_t seed = 1;
    std::size_t n_samples = 1'000'000;
    std::size_t streams = 8;
    std::size_t threads = 0;  // 0: hardware concurrency
};

struct MetricEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t streams = 0;
    std::vector<std::string> warnings;
};

/// Running mean and sum of squared deviations.
struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const Welford& o) noexcept {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double delta = o.mean - mean;
        const double total = na + nb;
        mean += delta * nb / total;
        m2 += o.m2 + delta * delta * na * nb / total;
        n += o.n;
    }

    double std_error() const noexcept {
        return n > 1 ? std::sqrt(std::max(m2, 0.0) / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    }
};

inline constexpr std::size_t kMinSamples = 1000;

namespace detail {

inline void check_options(const McOptions& opts) {
    if (opts.n_samples < kMinSamples) throw DomainError("Monte Carlo needs at least 1000 samples");
    if (opts.streams == 0) throw DomainError("Monte Carlo needs at least one stream");
}

}  // namespace detail

/// Runs fn(rng, out) n_samples times over the stream layout of opts and
/// returns one merged accumulator per output slot (out has n_stats slots).
template <class Fn>
std::vector<Welford> run_streams(const McOptions& opts, std::size_t n_stats, Fn fn) {
    detail::check_options(opts);
    const std::size_t S = opts.streams;
    std::vector<std::vector<Welford>> per_stream(S, std::vector<Welford>(n_stats));

    auto run_one = [&](std::size_t k) {
        Xoshiro256 rng(opts.seed);
        for (std::size_t j = 0; j < k; ++j) rng.jump();
        const std::size_t count = opts.n_samples / S + (k < opts.n_samples % S ? 1 : 0);
        std::vector<double> out(n_stats);
        auto& acc = per_stream[k];
        for (std::size_t i = 0; i < count; ++i) {
            fn(rng, std::span<double>(out));
            for (std::size_t j = 0; j < n_stats; ++j) acc[j].add(out[j]);
        }
    };

    std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, S);
    if (threads <= 1) {
        for (std::size_t k = 0; k < S; ++k) run_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t k; (k = next.fetch_add(1)) < S;) run_one(k);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<Welford> merged(n_stats);
    for (const auto& stream : per_stream)
        for (std::size_t j = 0; j < n_stats; ++j) merged[j].merge(stream[j]);
    return merged;
}

inline MetricEstimate to_estimate(const Welford& w, const McOptions& opts) {
    MetricEstimate e;
    e.value = w.mean;
    e.std_error = w.std_error();
    e.n_samples = w.n;
    e.seed = opts.seed;
    e.streams = opts.streams;
    return e;
}

/// Conditional error probability delta/(2 Gamma(phi)) sum_n Gamma(phi, q_n gamma).
inline double conditional_ber(const ModulationScheme& mod, double gamma) {
    double acc = 0.0;
    for (double q : mod.q) {
        const double x = q * std::max(gamma, 0.0);
        if (mod.phi == 0.5) acc += std::erfc(std::sqrt(x));
        else if (mod.phi == 1.0) acc += std::exp(-x);
        else acc += boost::math::gamma_q(mod.phi, x);
    }
    return 0.5 * mod.delta * acc;
}

inline constexpr double kDeepTailTarget = 1e-5;
inline constexpr double kMinEvents = 100.0;

/// Attaches deep-tail warnings to an outage estimate.
inline void flag_deep_tail(MetricEstimate& e) {
    const double events = e.value * static_cast<double>(e.n_samples);
    if (events < kMinEvents)
        e.warnings.push_back("only " + std::to_string(static_cast<long long>(events)) +
                             " outage events observed; estimate unreliable");
    if (e.value < kDeepTailTarget) e.warnings.push_back("outage below 1e-5 is outside the validated Monte Carlo range");
}

inline MetricEstimate outage_from(const Welford& w, const McOptions& opts) {
    MetricEstimate e = to_estimate(w, opts);
    const double n = static_cast<double>(w.n);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / n);
    flag_deep_tail(e);
    return e;
}

/// Fraction of samples with gamma < gamma_th, binomial standard error.
template <class Source>
MetricEstimate estimate_outage(const Source& source, double gamma_th, const McOptions& opts) {
    const auto acc = run_streams(opts, 1, [&](Xoshiro256& rng, std::span<double> out) {
        out[0] = source(rng) < gamma_th ? 1.0 : 0.0;
    });
    return outage_from(acc[0], opts);
}

/// Mean conditional BER.
template <class Source>
MetricEstimate estimate_ber(const Source& source, const ModulationScheme& mod, const McOptions& opts) {
    const auto acc = run_streams(opts, 1, [&](Xoshiro256& rng, std::span<double> out) {
        out[0] = conditional_ber(mod, source(rng));
    });
    return to_estimate(acc[0], opts);
}

/// Mean of log2(1 + kappa gamma).
template <class Source>
MetricEstimate estimate_capacity(const Source& source, double kappa, const McOptions& opts) {
    const auto acc = run_streams(opts, 1, [&](Xoshiro256& rng, std::span<double> out) {
        out[0] = std::log2(1.0 + kappa * source(rng));
    });
    return to_estimate(acc[0], opts);
}

inline MetricEstimate estimate_outage(const LinkScenario& s, double gamma0, double gamma_th, const McOptions& opts) {
    return estimate_outage(ChannelSource{s, gamma0}, gamma_th, opts);
}

inline MetricEstimate estimate_ber(const LinkScenario& s, double gamma0, const McOptions& opts) {
    return estimate_ber(ChannelSource{s, gamma0}, s.modulation, opts);
}

inline MetricEstimate estimate_capacity(const LinkScenario& s, double gamma0, const McOptions& opts) {
    return estimate_capacity(ChannelSource{s, gamma0}, capacity_kappa(s.detection), opts);
}

/// Sample moments E[h^n] of the combined gain, one per order.
inline std::vector<MetricEstimate> estimate_moments(const LinkScenario& s, std::span<const double> orders,
                                                    const McOptions& opts) {
    const auto acc = run_streams(opts, orders.size(), [&](Xoshiro256& rng, std::span<double> out) {
        const double h = sample_gain(s, rng);
        for (std::size_t j = 0; j < orders.size(); ++j) out[j] = std::pow(h, orders[j]);
    });
    std::vector<MetricEstimate> result;
    for (const auto& w : acc) result.push_back(to_estimate(w, opts));
    return result;
}

/// Empirical CDF of gamma at each point.
inline std::vector<MetricEstimate> estimate_cdf(const LinkScenario& s, double gamma0, std::span<const double> points,
                                                const McOptions& opts) {
    const auto acc = run_streams(opts, points.size(), [&](Xoshiro256& rng, std::span<double> out) {
        const double g = sample_snr(s, gamma0, rng);
        for (std::size_t j = 0; j < points.size(); ++j) out[j] = g < points[j] ? 1.0 : 0.0;
    });
    std::vector<MetricEstimate> result;
    for (const auto& w : acc) result.push_back(outage_from(w, opts));
    return result;
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band for an empirical CDF.
inline double dkw_epsilon(std::size_t n, double confidence = 0.99) {
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

/// Which metrics to estimate at every point of a gamma0 sweep.
struct SweepRequest {
    bool outage = false;
    bool ber = false;
    bool capacity = false;
    double gamma_th = 1.0;
};

struct SweepPointEstimate {
    std::optional<MetricEstimate> outage, ber, capacity;
};

/// Estimates the requested metrics at every gamma0 in one pass over the
/// channel samples: gamma0 only scales h^e, so each draw serves all points.
/// Gives the same numbers as separate per-point runs with the same options.
inline std::vector<SweepPointEstimate> estimate_sweep(const LinkScenario& s, std::span<const double> gamma0s,
                                                      const SweepRequest& req, const McOptions& opts) {
    const std::size_t per_point = static_cast<std::size_t>(req.outage) + req.ber + req.capacity;
    const double e = snr_exponent(s.detection);
    const double kappa = capacity_kappa(s.detection);
    const auto acc = run_streams(opts, per_point * gamma0s.size(), [&](Xoshiro256& rng, std::span<double> out) {
        const double h = sample_gain(s, rng);
        const double he = e == 2.0 ? h * h : h;
        std::size_t j = 0;
        for (double g0 : gamma0s) {
            const double gamma = g0 * he;
            if (req.outage) out[j++] = gamma < req.gamma_th ? 1.0 : 0.0;
            if (req.ber) out[j++] = conditional_ber(s.modulation, gamma);
            if (req.capacity) out[j++] = std::log2(1.0 + kappa * gamma);
        }
    });
    std::vector<SweepPointEstimate> result(gamma0s.size());
    std::size_t j = 0;
    for (auto& point : result) {
        if (req.outage) point.outage = outage_from(acc[j++], opts);
        if (req.ber) point.ber = to_estimate(acc[j++], opts);
        if (req.capacity) point.capacity = to_estimate(acc[j++], opts);
    }
    return result;
}

}  // namespace uwoc::mc
