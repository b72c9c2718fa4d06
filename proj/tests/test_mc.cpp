#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "uwoc/mc.hpp"
#include "uwoc/metrics.hpp"

namespace {

namespace mc = uwoc::mc;
using uwoc::GGLayer;
using uwoc::LinkScenario;

double ks_statistic(std::vector<double> xs, double (*cdf)(double)) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return d;
}

double exp1_cdf(double x) { return 1.0 - std::exp(-x); }

mc::McOptions options(std::size_t n, std::uint64_t seed = 7) {
    mc::McOptions o;
    o.n_samples = n;
    o.seed = seed;
    return o;
}

}  // namespace

TEST(Rng, ReferenceSequence) {
    mc::Xoshiro256 rng(std::array<std::uint64_t, 4>{1, 2, 3, 4});
    EXPECT_EQ(rng(), 11520u);
    EXPECT_EQ(rng(), 0u);
    EXPECT_EQ(rng(), 1509978240u);
    EXPECT_EQ(rng(), 1215971899390074240u);
}

TEST(Rng, JumpGivesDistinctStreams) {
    mc::Xoshiro256 a(42), b(42);
    b.jump();
    int equal = 0;
    for (int i = 0; i < 1000; ++i) equal += a() == b();
    EXPECT_EQ(equal, 0);
    mc::Xoshiro256 c(42);
    for (int i = 0; i < 100; ++i) {
        const double u = c.uniform();
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Samplers, GammaMeanAndVariance) {
    mc::Xoshiro256 rng(3);
    const std::size_t n = 1'000'000;
    for (double shape : {0.3, 1.0, 5.0}) {
        mc::Welford mean, var;
        std::vector<double> xs(n);
        for (auto& x : xs) {
            x = mc::sample_gamma(shape, rng);
            mean.add(x);
        }
        for (double x : xs) var.add((x - mean.mean) * (x - mean.mean));
        EXPECT_NEAR(mean.mean, shape, 3.0 * mean.std_error()) << shape;
        EXPECT_NEAR(var.mean, shape, 3.0 * var.std_error()) << shape;
    }
    EXPECT_THROW(mc::sample_gamma(0.0, rng), uwoc::DomainError);
}

TEST(Samplers, GeneralizedGammaExponentialReduction) {
    mc::Xoshiro256 rng(11);
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = mc::sample_gg({1.0, 1.0, 1.0}, rng);
    EXPECT_LT(ks_statistic(xs, exp1_cdf), 1.628 / std::sqrt(static_cast<double>(xs.size())));
}

TEST(Samplers, GeneralizedGammaMoments) {
    mc::Xoshiro256 rng(5);
    const GGLayer l{0.6302, 1.1780, 0.8444};
    mc::Welford m1, m2;
    for (int i = 0; i < 1'000'000; ++i) {
        const double x = mc::sample_gg(l, rng);
        m1.add(x);
        m2.add(mc::sample_gg({1.0, 2.0, 2.0}, rng) * mc::sample_gg({1.0, 2.0, 2.0}, rng));
    }
    const std::vector<GGLayer> one{l};
    EXPECT_NEAR(m1.mean, uwoc::stats::cascade_moment(one, 1.0), 3.0 * m1.std_error());
    // E[X Y] = E[X]^2 with E[X] = Gamma(3/2) for (1, 2, 2)
    EXPECT_NEAR(m2.mean, std::pow(std::tgamma(1.5), 2.0), 3.0 * m2.std_error());
}

TEST(Samplers, Pointing) {
    const uwoc::PointingError pe{6.0, 0.0032};
    EXPECT_DOUBLE_EQ(mc::sample_pointing(pe, 1.0), 0.0032);
    EXPECT_DOUBLE_EQ(mc::sample_pointing(pe, 0.0), 0.0);
    EXPECT_THROW(mc::sample_pointing(pe, 1.5), uwoc::DomainError);
    mc::Xoshiro256 rng(9);
    mc::Welford w;
    for (int i = 0; i < 1'000'000; ++i) w.add(mc::sample_pointing(pe, rng.uniform()));
    EXPECT_NEAR(w.mean, pe.rho2 * pe.a0 / (pe.rho2 + 1.0), 3.0 * w.std_error());
}

TEST(Estimators, SnrMomentMatchesAnalytic) {
    const LinkScenario s = uwoc::table1_scenario(6.0);
    const std::vector<double> orders{1.0, 2.0};
    const auto est = mc::estimate_moments(s, orders, options(1'000'000));
    for (std::size_t j = 0; j < orders.size(); ++j) {
        const double want = uwoc::stats::combined_moment(s.layers, s.pointing, orders[j]);
        EXPECT_NEAR(est[j].value, want, 3.0 * est[j].std_error) << orders[j];
    }
}

TEST(Estimators, EmpiricalCdfWithinDkwBand) {
    const LinkScenario s = uwoc::table1_scenario(1.0);
    const double gamma0 = 1e6;
    const uwoc::stats::SnrDistribution dist(s, gamma0);
    std::vector<double> points;
    for (int i = 0; i < 6; ++i) points.push_back(gamma0 * std::pow(10.0, -6.0 + i));
    const auto opts = options(200'000);
    const auto est = mc::estimate_cdf(s, gamma0, points, opts);
    const double eps = mc::dkw_epsilon(opts.n_samples);
    for (std::size_t j = 0; j < points.size(); ++j)
        EXPECT_NEAR(est[j].value, uwoc::stats::cdf_snr(dist, points[j]), eps) << points[j];
}

TEST(Estimators, TrivialOutage) {
    const auto s = uwoc::table1_scenario();
    EXPECT_EQ(mc::estimate_outage(s, 1e8, 0.0, options(5000)).value, 0.0);
    EXPECT_EQ(mc::estimate_outage(s, 1e8, 1e300, options(5000)).value, 1.0);
    const auto deep = mc::estimate_outage(s, 1e8, 0.0, options(5000));
    EXPECT_FALSE(deep.warnings.empty());
    EXPECT_THROW(mc::estimate_outage(s, 1e8, 1.0, options(10)), uwoc::DomainError);
}

TEST(Estimators, DeterministicSources) {
    const auto ook = uwoc::ModulationScheme::ook();
    const auto half = mc::estimate_ber(mc::ConstantSource{0.0}, ook, options(2000));
    EXPECT_DOUBLE_EQ(half.value, 0.5);
    EXPECT_EQ(half.std_error, 0.0);
    const auto b = mc::estimate_ber(mc::ConstantSource{4.0}, ook, options(2000));
    EXPECT_NEAR(b.value, 0.5 * std::erfc(2.0 / std::numbers::sqrt2), 1e-16);
    EXPECT_EQ(b.std_error, 0.0);
    const uwoc::ModulationScheme generic{2.0, 1.7, {0.3, 0.9}};
    const auto g = mc::estimate_ber(mc::ConstantSource{2.5}, generic, options(2000));
    double want = 0.0;
    for (double q : generic.q) want += std::tgamma(1.7) * boost::math::gamma_q(1.7, q * 2.5);
    EXPECT_NEAR(g.value, generic.delta / (2.0 * std::tgamma(1.7)) * want, 1e-15);
    EXPECT_DOUBLE_EQ(mc::estimate_capacity(mc::ConstantSource{0.0}, 1.0, options(2000)).value, 0.0);
    EXPECT_DOUBLE_EQ(mc::estimate_capacity(mc::ConstantSource{2.0}, 0.5, options(2000)).value, 1.0);
}

TEST(Estimators, BracketExactMetrics) {
    const auto opts = options(1'000'000);
    const LinkScenario s1 = uwoc::table1_scenario(1.0), s6 = uwoc::table1_scenario(6.0);
    const double gamma0 = 1e7;
    const uwoc::stats::SnrDistribution d1(s1, gamma0), d6(s6, gamma0);
    const auto out = mc::estimate_outage(s1, gamma0, gamma0 * 1e-4, opts);
    EXPECT_NEAR(out.value, uwoc::metrics::outage_exact(d1, gamma0 * 1e-4), 3.0 * out.std_error);
    const auto ber = mc::estimate_ber(s6, gamma0, opts);
    EXPECT_NEAR(ber.value, uwoc::metrics::ber_exact(d6), 3.0 * ber.std_error);
    const auto cap = mc::estimate_capacity(s1, gamma0, opts);
    EXPECT_NEAR(cap.value, uwoc::metrics::capacity_exact(d1), 3.0 * cap.std_error);
}

TEST(Determinism, SameSeedSameBits) {
    const auto s = uwoc::table1_scenario(6.0);
    auto o = options(20'000, 123);
    const auto a = mc::estimate_capacity(s, 1e8, o);
    o.threads = 3;
    const auto b = mc::estimate_capacity(s, 1e8, o);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    o.seed = 124;
    EXPECT_NE(mc::estimate_capacity(s, 1e8, o).value, a.value);
}

TEST(Determinism, SweepEqualsPerPointRuns) {
    const auto s = uwoc::table1_scenario(1.0);
    const auto o = options(20'000, 5);
    const std::vector<double> g0s{1e5, 1e9};
    mc::SweepRequest req{true, true, true, 1.0};
    const auto sweep = mc::estimate_sweep(s, g0s, req, o);
    for (std::size_t j = 0; j < g0s.size(); ++j) {
        EXPECT_EQ(sweep[j].outage->value, mc::estimate_outage(s, g0s[j], 1.0, o).value);
        EXPECT_EQ(sweep[j].ber->value, mc::estimate_ber(s, g0s[j], o).value);
        EXPECT_EQ(sweep[j].capacity->value, mc::estimate_capacity(s, g0s[j], o).value);
    }
}

TEST(Determinism, StreamLayoutsAgreeStatistically) {
    const auto s = uwoc::table1_scenario(6.0);
    const double gamma0 = 1e9;
    const double exact = uwoc::metrics::capacity_exact(uwoc::stats::SnrDistribution(s, gamma0));
    for (std::size_t streams : {1u, 3u, 16u}) {
        auto o = options(200'000, 99);
        o.streams = streams;
        const auto e = mc::estimate_capacity(s, gamma0, o);
        EXPECT_EQ(e.streams, streams);
        EXPECT_EQ(e.n_samples, o.n_samples);
        EXPECT_NEAR(e.value, exact, 3.0 * e.std_error) << streams;
    }
}

TEST(Welford, MergeMatchesSinglePass) {
    mc::Welford all, a, b;
    for (int i = 0; i < 100; ++i) {
        const double x = std::sin(i * 0.7) * 3.0 + i * 0.01;
        all.add(x);
        (i < 37 ? a : b).add(x);
    }
    a.merge(b);
    EXPECT_EQ(a.n, all.n);
    EXPECT_NEAR(a.mean, all.mean, 1e-14);
    EXPECT_NEAR(a.m2, all.m2, 1e-11);
}
