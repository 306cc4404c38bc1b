#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "wdlab/normal.hpp"
#include "wdlab/parallel.hpp"
#include "wdlab/rng.hpp"
#include "wdlab/stats.hpp"

using namespace wdlab;

TEST(Stream, SameKeySameDraws) {
    Stream a(42, {tag::block, 3, 7});
    Stream b(42, {tag::block, 3, 7});
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Stream, PathsAreDistinct) {
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 50; ++i)
        for (std::uint64_t j = 0; j < 50; ++j) keys.insert(derive_key(1, {i, j}));
    EXPECT_EQ(keys.size(), 2500u);
    EXPECT_NE(derive_key(1, {1, 2}), derive_key(1, {2, 1}));
    EXPECT_NE(derive_key(1, {1}), derive_key(2, {1}));
}

TEST(Stream, UniformIsOpenAndCentered) {
    Stream s(7, {tag::path});
    RunningMoments m;
    for (int i = 0; i < 200000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        m.add(u);
    }
    EXPECT_NEAR(m.mean, 0.5, 5 * std::sqrt(1.0 / 12 / 200000));
    EXPECT_NEAR(m.variance(), 1.0 / 12, 2e-3);
}

TEST(Normal, QuantileMatchesBoostInBulk) {
    const boost::math::normal_distribution<double> reference;
    for (double t = 1e-6; t < 1.0; t += 0.0007) {
        const double ours = inverse_normal_cdf(t);
        const double ref = boost::math::quantile(reference, t);
        EXPECT_LE(std::abs(ours - ref), 1e-12 * std::max(1.0, std::abs(ref))) << "t=" << t;
    }
}

TEST(Normal, QuantileDeepTails) {
    const boost::math::normal_distribution<double> reference;
    for (double c : {1e-10, 1e-15, 1e-20, 1e-100, 1e-300}) {
        const double ref = boost::math::quantile(boost::math::complement(reference, c));
        EXPECT_NEAR(inverse_normal_cdf_upper(c), ref, 1e-10 * ref) << c;
        EXPECT_NEAR(inverse_normal_cdf(c), -ref, 1e-10 * ref) << c;
    }
}

TEST(Normal, KnownValues) {
    EXPECT_NEAR(inverse_normal_cdf(0.25), -0.6744897501960817, 1e-14);
    EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-14);
    EXPECT_EQ(inverse_normal_cdf(0.5), 0.0);
    EXPECT_TRUE(std::isinf(inverse_normal_cdf(0.0)));
    EXPECT_NEAR(normal_cdf(1.0) + normal_sf(1.0), 1.0, 1e-15);
}

TEST(Normal, DrawsHaveUnitVariance) {
    Stream s(11, {tag::reference});
    RunningMoments m;
    for (int i = 0; i < 200000; ++i) m.add(standard_normal(s));
    EXPECT_NEAR(m.mean, 0.0, 0.01);
    EXPECT_NEAR(m.variance(), 1.0, 0.01);
}

TEST(ClopperPearson, ClosedFormAtZeroSuccesses) {
    const auto ci = clopper_pearson(0, 10);
    EXPECT_EQ(ci.low, 0.0);
    EXPECT_NEAR(ci.high, 1.0 - std::pow(0.025, 0.1), 1e-12);
    const auto all = clopper_pearson(10, 10);
    EXPECT_EQ(all.high, 1.0);
    EXPECT_NEAR(all.low, std::pow(0.025, 0.1), 1e-12);
}

TEST(ClopperPearson, BracketsTheEstimate) {
    for (std::uint64_t k : {1u, 5u, 50u, 99u}) {
        const auto ci = clopper_pearson(k, 100);
        EXPECT_LT(ci.low, k / 100.0);
        EXPECT_GT(ci.high, k / 100.0);
    }
    EXPECT_THROW(clopper_pearson(3, 2), LabError);
}

TEST(Kolmogorov, SeriesAgreeAtSwitchPoint) {
    EXPECT_NEAR(kolmogorov_sf(1.1799999), kolmogorov_sf(1.18), 1e-6);
    EXPECT_NEAR(kolmogorov_sf(1.3580986), 0.05, 1e-6);
    EXPECT_NEAR(kolmogorov_sf(1.6276236), 0.01, 1e-6);
}

TEST(Kolmogorov, AcceptsTrueLawRejectsShift) {
    Stream s(5, {tag::reference});
    std::vector<double> x(20000);
    for (auto& v : x) v = standard_normal(s);
    EXPECT_TRUE(ks_test(x, normal_cdf).passes(0.01));
    for (auto& v : x) v += 0.05;
    EXPECT_FALSE(ks_test(x, normal_cdf).passes(0.01));
}

TEST(PowerFit, RecoversNoiselessExponent) {
    std::vector<double> n, y;
    for (int e = 6; e <= 16; ++e) {
        n.push_back(std::ldexp(1.0, e));
        y.push_back(3.5 * std::pow(n.back(), 0.3125));
    }
    const auto fit = fit_power_law(n, y);
    EXPECT_NEAR(fit.exponent, 0.3125, 0.01);
    EXPECT_NEAR(std::exp(fit.intercept), 3.5, 1e-9);
}

TEST(PowerFit, PropagatedErrorScalesWithPointNoise) {
    std::vector<double> n{16, 32, 64, 128}, y{1, 2, 3, 4}, se1(4, 0.1), se2(4, 0.2);
    const auto a = fit_power_law(n, y, se1);
    const auto b = fit_power_law(n, y, se2);
    EXPECT_NEAR(b.exponent_se / a.exponent_se, 2.0, 1e-12);
}

TEST(Parallel, CoversEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsWorkerFailure) {
    EXPECT_THROW(parallel_for(100, 3,
                              [](std::size_t i) {
                                  if (i == 57) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}
