#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "oracles.hpp"
#include "wdlab/coefficients.hpp"
#include "wdlab/coupling.hpp"
#include "wdlab/stats.hpp"

using namespace wdlab;
using Rational = boost::multiprecision::cpp_rational;

namespace {

FiniteChain three_state() {
    Eigen::MatrixXd p(3, 3);
    p << 0.5, 0.25, 0.25, 0.125, 0.75, 0.125, 0.25, 0.5, 0.25;
    return build_finite_chain(p, {2.0, 0.0, -1.0});
}

double standard_cdf(double x) { return normal_cdf(x); }

}  // namespace

TEST(Schedule, WorkedValues) {
    EXPECT_EQ(make_schedule(16, 4.0).m[16], 6);
    EXPECT_EQ(make_schedule(16, 4.0, ScheduleVariant::log_inflated, 0.5).m[16], 11);
    EXPECT_EQ(make_schedule(16, 4.0, ScheduleVariant::inflated, 0.5).m[16], 9);
    const auto s = make_schedule(5, 3.0);
    EXPECT_EQ(s.m[0], 0);
    EXPECT_EQ(s.length(), 64u);
    EXPECT_DOUBLE_EQ(s.lambda[0], 0.0);
}

TEST(Schedule, BalancedSandwich) {
    for (double p : {2.5, 3.0, 3.5, 4.0}) {
        const auto s = make_schedule(40, p);
        for (int level = 2; level <= 40; ++level) {
            const double two_m = std::ldexp(1.0, s.m[level]);
            const double upper = std::pow(2.0, 2.0 * level / p) * std::pow(level, -2.0 / p);
            EXPECT_LE(two_m, upper * (1 + 1e-12)) << p << " " << level;
            EXPECT_GE(two_m, 0.5 * upper * (1 - 1e-12)) << p << " " << level;
            EXPECT_LE(s.m[level], level);
        }
    }
}

TEST(Schedule, ClampedAndMonotoneInEpsilon) {
    const auto a = make_schedule(30, 2.1, ScheduleVariant::log_inflated, 0.5);
    const auto b = make_schedule(30, 2.1, ScheduleVariant::log_inflated, 1.5);
    for (int level = 0; level <= 30; ++level) {
        EXPECT_LE(a.m[level], level);
        EXPECT_LE(a.m[level], b.m[level]);
    }
}

TEST(Schedule, RejectsOutOfRangeExponent) {
    EXPECT_THROW(make_schedule(4, 2.0), LabError);
    EXPECT_THROW(make_schedule(4, 4.5), LabError);
    EXPECT_THROW(make_schedule(4, 3.0, ScheduleVariant::inflated, 0.0), LabError);
}

TEST(BlockLaw, RoutesMatchPathEnumeration) {
    for (const auto& chain : {make_flip_chain(0.25), three_state()}) {
        const int max_m = chain.size() == 2 ? 4 : 3;
        for (std::size_t start = 0; start < chain.size(); ++start)
            for (int m = 0; m <= max_m; ++m) {
                const auto a = block_law_stepwise<double>(chain, start, m);
                const auto b = block_law_doubling<double>(chain, start, m);
                const auto exact = oracle::block_law_by_paths(chain, start, m);
                ASSERT_EQ(a.sums, b.sums);
                double covered = 0.0;
                for (std::size_t off = 0; off < a.sums; ++off)
                    for (std::size_t t = 0; t < chain.size(); ++t) {
                        const std::int64_t sum = a.min_units + static_cast<std::int64_t>(off);
                        const auto it = exact.find({sum, t});
                        const double want = it == exact.end() ? 0.0 : it->second;
                        EXPECT_NEAR(a.at(sum, t), want, 1e-14);
                        EXPECT_NEAR(b.at(sum, t), want, 1e-14);
                        covered += want;
                    }
                EXPECT_NEAR(covered, 1.0, 1e-13);
            }
    }
}

TEST(BlockLaw, ExactMassInRationals) {
    for (const auto& chain : {make_flip_chain(0.25), three_state()})
        for (std::size_t start = 0; start < chain.size(); ++start)
            for (int m = 0; m <= 4; ++m) {
                const auto a = block_law_stepwise<Rational>(chain, start, m);
                const auto b = block_law_doubling<Rational>(chain, start, m);
                EXPECT_EQ(a.total(), Rational(1));
                EXPECT_EQ(b.total(), Rational(1));
                EXPECT_TRUE(a.mass == b.mass);
            }
}

TEST(BlockLaw, StationaryMixtureIsCentred) {
    for (const auto& chain : {make_flip_chain(0.25), three_state()}) {
        double mixed = 0.0;
        for (std::size_t s = 0; s < chain.size(); ++s)
            mixed += chain.stationary(static_cast<Eigen::Index>(s)) * block_sum_dist(chain, s, 5).mean();
        EXPECT_NEAR(mixed, 0.0, 1e-10);
    }
}

TEST(BlockLaw, AtomBudget) {
    try {
        block_sum_dist(make_flip_chain(0.25), 0, 23);
        FAIL();
    } catch (const LabError& e) {
        EXPECT_NE(std::string(e.what()).find("atom budget"), std::string::npos);
    }
}

TEST(BlockLaw, CumulativeTablesAreConsistent) {
    const auto d = block_sum_dist(three_state(), 1, 4);
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        EXPECT_NEAR(d.cdf[i] + d.upper[i], 1.0, 1e-13);
        EXPECT_GT(d.atoms[i].prob, 0.0);
        if (i) EXPECT_LT(d.atoms[i - 1].units, d.atoms[i].units);
    }
}

TEST(Quantile, TwoPointExample) {
    const auto d = make_block_dist(1.0, {{-1, 0.5}, {1, 0.5}});
    EXPECT_NEAR(conditional_quantile_gaussian(-1.0, d, 1.0, 0, 0.5), -0.6744897501960817, 1e-12);
    EXPECT_NEAR(conditional_quantile_gaussian(1.0, d, 1.0, 0, 0.5), 0.6744897501960817, 1e-12);
    // Between atoms: t = F(u-) = 1/2.
    EXPECT_NEAR(conditional_quantile_gaussian(0.0, d, 1.0, 0, 0.9), 0.0, 1e-15);
    // Scale sigma 2^{m/2}.
    EXPECT_NEAR(conditional_quantile_gaussian(-1.0, d, 4.0, 2, 0.5), -4.0 * 0.6744897501960817, 1e-11);
}

TEST(Quantile, InvalidInputs) {
    const auto d = make_block_dist(1.0, {{-1, 0.5}, {1, 0.5}});
    EXPECT_THROW(conditional_quantile_gaussian(-1.0, d, 1.0, 0, 0.0), LabError);
    EXPECT_THROW(conditional_quantile_gaussian(-1.0, d, 1.0, 0, 1.0), LabError);
    EXPECT_THROW(conditional_quantile_gaussian(-2.0, d, 1.0, 0, 0.5), LabError);
    EXPECT_THROW(conditional_quantile_gaussian(-1.0, d, 0.0, 0, 0.5), LabError);
}

TEST(Quantile, ExtremeAtomsAreClamped) {
    const auto d = make_block_dist(1.0, {{0, 1.0 - 1e-300}, {5, 1e-300}});
    const double v = conditional_quantile_gaussian(5.0, d, 1.0, 0, 0.5);
    EXPECT_EQ(v, quantile_clamp);
}

TEST(Quantile, RandomizedTransformIsStandardNormal) {
    const auto chain = make_flip_chain(0.25);
    const auto d = block_sum_dist(chain, 0, 3);
    std::vector<double> out;
    Stream stream(41, {1});
    for (int i = 0; i < 20'000; ++i) {
        const double w = stream.uniform();
        const std::size_t j = static_cast<std::size_t>(std::lower_bound(d.cdf.begin(), d.cdf.end(), w) - d.cdf.begin());
        const double u = d.value(std::min(j, d.atoms.size() - 1));
        out.push_back(conditional_quantile_gaussian(u, d, 1.0, 3, stream.uniform()) / std::sqrt(8.0));
    }
    EXPECT_TRUE(ks_test(out, standard_cdf).passes(0.01));
}

TEST(Split, SumsExactlyAndHasNormalMarginals) {
    Stream stream(7, {3});
    EXPECT_EQ(skorohod_split(1.25, 0, 3.0, stream), std::vector<double>{1.25});
    std::vector<double> first, last;
    for (int i = 0; i < 5000; ++i) {
        const double v = std::sqrt(2.0 * 16.0) * standard_normal(stream);
        const auto inc = skorohod_split(v, 4, 2.0, stream);
        ASSERT_EQ(inc.size(), 16u);
        long double total = 0.0L;
        for (double x : inc) total += x;
        EXPECT_NEAR(static_cast<double>(total), v, 1e-12);
        first.push_back(inc.front() / std::sqrt(2.0));
        last.push_back(inc.back() / std::sqrt(2.0));
    }
    EXPECT_TRUE(ks_test(first, standard_cdf).passes(0.01));
    EXPECT_TRUE(ks_test(last, standard_cdf).passes(0.01));
}

TEST(Wasserstein, ClosedFormExamples) {
    EXPECT_NEAR(w2_conditional(make_block_dist(1.0, {{0, 1.0}}), 1.0), 1.0, 1e-14);
    EXPECT_NEAR(w2_conditional(make_block_dist(1.0, {{0, 1.0}}), 2.5), 2.5, 1e-14);
    // Two-point law against numerical quadrature of the quantile gap.
    const auto d = make_block_dist(1.0, {{-1, 0.3}, {2, 0.7}});
    double direct = 0.0;
    const int steps = 400'000;
    for (int i = 0; i < steps; ++i) {
        const double t = (i + 0.5) / steps;
        const double q = t < 0.3 ? -1.0 : 2.0;
        const double g = 1.5 * inverse_normal_cdf(t);
        direct += (q - g) * (q - g) / steps;
    }
    EXPECT_NEAR(w2_conditional(d, 2.25), direct, 1e-4);
}

TEST(Wasserstein, BlockSquaredGapMatchesClosedForm) {
    const auto chain = make_flip_chain(0.25);
    const double sigma2 = sigma2_exact(chain).value;
    const int m = 3;
    const BlockDistCache cache(chain, {m});
    double exact = 0.0;
    for (std::size_t s = 0; s < 2; ++s)
        exact += chain.stationary(static_cast<Eigen::Index>(s)) * w2_conditional(cache.get(s, m), sigma2 * 8.0);
    const ChainSampler sampler(chain);
    RunningMoments gap;
    for (std::uint64_t r = 0; r < 20'000; ++r) {
        Stream stream(5, {r});
        std::size_t y = sampler.initial(stream);
        const std::size_t start = y;
        std::int64_t units = 0;
        for (int i = 0; i < 8; ++i) {
            y = sampler.next(y, stream);
            units += chain.units[y];
        }
        const double u = static_cast<double>(units) * chain.step;
        const double v = conditional_quantile_gaussian(u, cache.get(start, m), sigma2, m, stream.uniform());
        gap.add((u - v) * (u - v));
    }
    EXPECT_LE(std::abs(gap.mean - exact), 3.0 * gap.standard_error());
}

class CoupledFlipChain : public ::testing::Test {
protected:
    FiniteChain chain = make_flip_chain(0.25);
    double sigma2 = sigma2_exact(chain).value;
    CouplingSchedule schedule = make_schedule(11, 4.0);
    BlockDistCache cache{chain, schedule.m};
};

TEST_F(CoupledFlipChain, DecompositionsHoldPathwise) {
    for (std::uint64_t r = 0; r < 20; ++r) {
        const auto path = build_coupling(chain, schedule, sigma2, schedule.length(), 3, r, cache);
        const auto e = coupling_errors(path);
        EXPECT_TRUE(e.level_decomposition_holds);
        EXPECT_TRUE(e.dyadic_decomposition_holds);
        EXPECT_EQ(e.per_level.size(), 12u);
        EXPECT_GT(e.sup_error, 0.0);
    }
}

TEST_F(CoupledFlipChain, BlockSumsArePreserved) {
    const auto path = build_coupling(chain, schedule, sigma2, schedule.length(), 3, 0, cache);
    for (const auto& b : path.blocks) {
        const std::size_t a = (std::size_t{1} << b.level) + (b.k - 1) * (std::size_t{1} << b.m);
        const std::size_t end = a + (std::size_t{1} << b.m);
        EXPECT_NEAR(path.t[end] - path.t[a], b.v, 1e-9);
        EXPECT_NEAR(path.s[end] - path.s[a], b.u, 1e-12);
        EXPECT_EQ(path.s[a], b.start_sum);
    }
}

TEST_F(CoupledFlipChain, IdentityModeHasNoError) {
    const auto path = build_coupling(chain, schedule, sigma2, schedule.length(), 3, 0, cache, {true});
    EXPECT_EQ(path.s, path.t);
    EXPECT_EQ(coupling_errors(path).sup_error, 0.0);
}

TEST_F(CoupledFlipChain, Deterministic) {
    const auto a = build_coupling(chain, schedule, sigma2, 1000, 8, 2, cache);
    const auto b = build_coupling(chain, schedule, sigma2, 1000, 8, 2, cache);
    EXPECT_EQ(a.z, b.z);
    EXPECT_EQ(coupling_errors(a).sup_error, coupling_errors(b).sup_error);
    const auto c = build_coupling(chain, schedule, sigma2, 1000, 8, 3, cache);
    EXPECT_NE(a.z, c.z);
}

TEST_F(CoupledFlipChain, HorizonLimitsTheSupremum) {
    const auto path = build_coupling(chain, schedule, sigma2, 100, 8, 2, cache);
    double direct = 0.0;
    for (std::size_t k = 1; k <= 100; ++k) direct = std::max(direct, std::abs(path.s[k] - path.t[k]));
    EXPECT_EQ(coupling_errors(path).sup_error, direct);
    EXPECT_THROW(build_coupling(chain, schedule, sigma2, schedule.length() + 1, 8, 2, cache), LabError);
}

TEST_F(CoupledFlipChain, GaussianMarginalsAndIndependence) {
    std::vector<double> z_first, z_mid, v_std;
    std::vector<double> start_sums, vs;
    for (std::uint64_t r = 0; r < 2000; ++r) {
        const auto path = build_coupling(chain, schedule, sigma2, schedule.length(), 17, r, cache);
        z_first.push_back(path.z[1] / std::sqrt(sigma2));
        z_mid.push_back(path.z[1500] / std::sqrt(sigma2));
        const auto& b = path.blocks[path.blocks.size() / 2];
        v_std.push_back(b.v / std::sqrt(sigma2 * std::ldexp(1.0, b.m)));
        start_sums.push_back(b.start_sum);
        vs.push_back(b.v);
    }
    EXPECT_TRUE(ks_test(z_first, standard_cdf).passes(0.01));
    EXPECT_TRUE(ks_test(z_mid, standard_cdf).passes(0.01));
    EXPECT_TRUE(ks_test(v_std, standard_cdf).passes(0.01));
    RunningMoments a, b;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        a.add(start_sums[i]);
        b.add(vs[i]);
    }
    double cov = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) cov += (start_sums[i] - a.mean) * (vs[i] - b.mean);
    cov /= static_cast<double>(vs.size() - 1);
    const double corr = cov / std::sqrt(a.variance() * b.variance());
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(2000.0));
}

TEST(Coupling, DegenerateProcessIsRejected) {
    const auto chain = make_coboundary(make_flip_chain(0.25), {1.0, -1.0});
    const auto schedule = make_schedule(3, 4.0);
    const BlockDistCache cache(chain, schedule.m);
    try {
        build_coupling(chain, schedule, 0.0, 16, 1, 0, cache);
        FAIL();
    } catch (const LabError& e) {
        EXPECT_STREQ(e.what(), "degenerate process: coupling undefined");
    }
}
