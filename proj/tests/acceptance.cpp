// Acceptance checks AC1-AC10. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Runtime budgets are part of each criterion.

#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "wdlab/lab.hpp"

using namespace wdlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_seconds, const std::function<Outcome()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = run();
    } catch (const std::exception& e) {
        out = {false, std::string("error: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %s: %s [%s; %.1f s of %.0f s]\n", id, pass ? "PASS" : "FAIL", title, out.detail.c_str(), elapsed,
                budget_seconds);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

FiniteChain dyadic_three_state() {
    Eigen::MatrixXd p(3, 3);
    p << 0.5, 0.25, 0.25, 0.125, 0.75, 0.125, 0.25, 0.5, 0.25;
    return build_finite_chain(p, {2.0, 0.0, -1.0});
}

FiniteChain four_state() {
    Eigen::MatrixXd p(4, 4);
    p << 0.4, 0.3, 0.2, 0.1, 0.1, 0.5, 0.2, 0.2, 0.25, 0.25, 0.25, 0.25, 0.3, 0.1, 0.1, 0.5;
    return build_finite_chain(p, {1.0, -1.0, 2.0, 0.0});
}

ExperimentConfig rate_config(unsigned threads) {
    ExperimentConfig c;
    c.process = {{"type", "flip"}, {"a", 0.25}};
    for (int e = 10; e <= 17; ++e) c.n_list.push_back(std::size_t{1} << e);
    c.replicates = 64;
    c.seed = 2024;
    c.threads = threads;
    c.tolerance = 0.08;
    return c;
}

ExperimentConfig wasserstein_config(unsigned threads) {
    auto c = rate_config(threads);
    c.tolerance = 0.10;
    return c;
}

ExperimentConfig bound_config(unsigned threads) {
    ExperimentConfig c;
    c.process = {{"type", "flip"}, {"a", 0.25}};
    c.coefficients.p = 4;
    c.coefficients.q = 4;
    c.coefficients.horizon = 6;
    c.coefficients.tuple_horizon = 6;
    c.coefficients.tail_kind = "declared";
    c.coefficients.tail = TailModel::geometric(0.5);
    c.bound.n_list = {64, 256, 1024};
    c.bound.per_n = 4;
    c.bound.replicates = 100'000;
    c.bound.holdout_replicates = 100'000;
    c.seed = 3;
    c.threads = threads;
    return c;
}

ExperimentConfig degenerate_config(unsigned threads) {
    ExperimentConfig c;
    c.process = {{"type", "coboundary"}, {"base", {{"type", "flip"}, {"a", 0.25}}}, {"g", {1.0, -1.0}}};
    c.n_list = {100, 1000, 10000};
    c.replicates = 2000;
    c.seed = 9;
    c.threads = threads;
    return c;
}

ExperimentConfig coefficient_config(unsigned threads) {
    ExperimentConfig c;
    c.process = {{"type", "flip"}, {"a", 0.25}};
    c.coefficients.p = 4;
    c.coefficients.q = 4;
    c.coefficients.horizon = 6;
    c.threads = threads;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const auto chain = make_flip_chain(0.25);

    criterion("AC1", "theta_{1,1}(k) = 0.5^k on the flip chain, matrix vs path enumeration", 1.0, [&] {
        double worst = 0.0;
        for (int k = 1; k <= 6; ++k) {
            const double m = theta_exact(chain, 1, 1, k);
            const double e = oracle::theta_by_paths(chain, 1, 1, k, 12);
            worst = std::max({worst, std::abs(m - std::pow(0.5, k)), std::abs(m - e)});
        }
        return Outcome{worst <= 1e-10, fmt("max deviation %.2e", worst)};
    });

    criterion("AC2", "sigma^2 = 3 and finite-n variance extrapolation", 10.0, [&] {
        const auto s = sigma2_exact(chain);
        const double extrapolated = oracle::sigma2_extrapolated(chain, 1 << 16);
        const double rel = std::abs(extrapolated - s.value) / s.value;
        const bool ok = std::abs(s.value - 3.0) <= 1e-8 && rel <= 1e-3;
        return Outcome{ok, fmt("sigma^2 = %.12f", s.value) + fmt(", extrapolation rel. error %.2e", rel)};
    });

    criterion("AC3", "product chains: vanishing third moments and theta_Z <= 2^{q+1} theta_X", 30.0, [&] {
        double worst_moment = 0.0;
        bool bounds = true;
        for (const auto& base : {chain, dyadic_three_state(), four_state()}) {
            const auto z = symmetrize(base);
            for (int i = 1; i <= 6; ++i)
                for (int j = i + 1; j <= 6; ++j)
                    for (int k = j + 1; k <= 6; ++k)
                        worst_moment = std::max(worst_moment, std::abs(stationary_moment(z, {i, j, k}, {1, 1, 1})));
            for (auto [p, q] : {std::pair{1, 1}, {2, 2}})
                for (int k = 0; k <= 4; ++k) bounds = bounds && symmetrization_check(base, p, q, k, 6).holds();
        }
        return Outcome{worst_moment <= 1e-10 && bounds,
                       fmt("max |E Z_i Z_j Z_k| %.2e", worst_moment) + (bounds ? ", bounds hold" : ", bound violated")};
    });

    criterion("AC4", "Fuk-Nagaev constants fitted on 12 points dominate a 12-point holdout at 1e5 replicates", 600.0, [&] {
        const auto r = bound_fit_report(bound_config(1));
        const double c1 = r.summary["c1"].get<double>(), c2 = r.summary["c2"].get<double>();
        std::size_t train = 0, hold = 0;
        for (const auto& row : r.table.rows) (row.back() > 0.5 ? hold : train)++;
        const bool ok = std::isfinite(c1) && std::isfinite(c2) && c1 <= 1e4 && c2 <= 1e4 && train == 12 && hold == 12 &&
                        r.summary["holdout_dominated"].get<bool>();
        return Outcome{ok, fmt("c1 = %g", c1) + fmt(", c2 = %g", c2) +
                               (r.summary["holdout_dominated"].get<bool>() ? ", holdout dominated" : ", holdout violated")};
    });

    criterion("AC5", "polynomial-regime slope of the bound over the last decade of x", 1.0, [&] {
        ThetaTable t;
        for (int k = 0; k <= 8; ++k) t.values.push_back(std::pow(0.5, k));
        const auto series = series_summary(t);
        const double n = 1 << 17, x_max = n / 2.0;
        std::vector<double> xs, rhs;
        for (int i = 0; i <= 20; ++i) {
            const double x = x_max / 10.0 * std::pow(10.0, i / 20.0);
            xs.push_back(x);
            rhs.push_back(fuk_nagaev_rhs(fuk_nagaev_params(n, x, 1.0, series)));
        }
        const auto fit = fit_power_law(xs, rhs);
        return Outcome{fit.exponent >= -4.2 && fit.exponent <= -3.8 && series.theta2_finite(),
                       fmt("slope %.4f", fit.exponent)};
    });

    criterion("AC6", "coupling construction: Gaussian marginals, exact block mass, E(U-V)^2 = W2^2", 300.0, [&] {
        const double sigma2 = sigma2_exact(chain).value;
        const auto schedule = make_schedule(11, 4.0);
        const BlockDistCache cache(chain, schedule.m);
        const ChainSampler sampler(chain);
        std::vector<double> z, v;
        for (std::uint64_t r = 0; r < 25; ++r) {
            const auto path = build_coupling(chain, schedule, sigma2, schedule.length(), 606, r, cache, {}, &sampler);
            for (std::size_t i = 1; i <= path.n; ++i) z.push_back(path.z[i] / std::sqrt(sigma2));
            for (const auto& b : path.blocks) v.push_back(b.v / std::sqrt(sigma2 * std::ldexp(1.0, b.m)));
        }
        const auto ks_z = ks_test(z, [](double x) { return normal_cdf(x); });
        const auto ks_v = ks_test(v, [](double x) { return normal_cdf(x); });

        using Rational = boost::multiprecision::cpp_rational;
        bool exact_mass = true;
        for (const auto& c : {chain, dyadic_three_state()})
            for (std::size_t s = 0; s < c.size(); ++s)
                for (int m = 0; m <= 4; ++m)
                    exact_mass = exact_mass && block_law_stepwise<Rational>(c, s, m).total() == Rational(1) &&
                                 block_law_doubling<Rational>(c, s, m).total() == Rational(1);

        const int m = 4;
        const BlockDistCache small(chain, {m});
        double w2 = 0.0;
        for (std::size_t s = 0; s < chain.size(); ++s)
            w2 += chain.stationary(static_cast<Eigen::Index>(s)) * w2_conditional(small.get(s, m), sigma2 * 16.0);
        RunningMoments gap;
        for (std::uint64_t r = 0; r < 100'000; ++r) {
            Stream stream(707, {tag::block, r});
            std::size_t y = sampler.initial(stream);
            const std::size_t start = y;
            std::int64_t units = 0;
            for (int i = 0; i < 16; ++i) {
                y = sampler.next(y, stream);
                units += chain.units[y];
            }
            const double u = static_cast<double>(units) * chain.step;
            const double vv = conditional_quantile_gaussian(u, small.get(start, m), sigma2, m, stream.uniform());
            gap.add((u - vv) * (u - vv));
        }
        const double z_score = std::abs(gap.mean - w2) / gap.standard_error();
        const bool ok = ks_z.passes(0.01) && ks_v.passes(0.01) && exact_mass && z_score <= 3.0;
        return Outcome{ok, fmt("KS p(Z) = %.3f", ks_z.p_value) + fmt(" over %g increments", double(z.size())) +
                               fmt(", KS p(V) = %.3f", ks_v.p_value) + (exact_mass ? ", mass exact" : ", mass inexact") +
                               fmt(", E(U-V)^2 = %.5f", gap.mean) + fmt(" vs W2^2 = %.5f", w2) +
                               fmt(" (%.2f SE)", z_score)};
    });

    criterion("AC7", "L2 coupling error exponent 0.25 +- 0.08, n = 2^10..2^17, 64 replicates", 1800.0, [&] {
        const auto est = run_rate_experiment(rate_config(1));
        return Outcome{est.pass, fmt("exponent %.4f", est.exponent) + fmt(" (se %.4f)", est.exponent_se)};
    });

    criterion("AC8", "Donsker line W2 bound exponent -0.25 +- 0.10 with n^{-1/6} reference line", 1800.0, [&] {
        const auto r = donsker_wasserstein(wasserstein_config(1));
        const bool reference = r.rate.reference_exponent && std::abs(*r.rate.reference_exponent + 1.0 / 6.0) < 1e-15 &&
                               !r.rate.rows.empty() && r.rate.rows.back().reference > 0.0;
        return Outcome{r.rate.pass && reference && r.identity_holds,
                       fmt("exponent %.4f", r.rate.exponent) + fmt(" (se %.4f)", r.rate.exponent_se) +
                           (r.identity_holds ? ", rescaling identity holds" : ", rescaling identity violated")};
    });

    criterion("AC9", "degenerate suite on the coboundary", 300.0, [&] {
        const auto r = run_degenerate_suite(degenerate_config(1));
        const double growth = r.moments.growth ? r.moments.growth->exponent : 0.0;
        const bool zeros = r.series.pathwise_zero_from.has_value() && r.series.zero_beyond_bound;
        const bool ok = r.moments.all_below_bound && std::abs(growth) <= 0.05 && zeros && r.pass;
        return Outcome{ok, fmt("bound %.3g", r.moments.bound) + fmt(", max E|S_n|^2 %.4f", r.moments.rows.back().moment) +
                               fmt(", growth exponent %.4f", growth) +
                               (zeros ? ", summands zero past the pathwise bound" : ", nonzero summands")};
    });

    criterion("AC10", "byte-identical CSV/JSON across thread counts", 3600.0, [&] {
        const auto root = fs::temp_directory_path() / "wdlab_acceptance";
        fs::remove_all(root);
        const auto emit_all = [&](unsigned threads) {
            const auto dir = root / ("threads" + std::to_string(threads));
            emit_report(dir, coefficient_report(coefficient_config(threads)));
            emit_report(dir, bound_fit_report(bound_config(threads)));
            const auto rc = rate_config(threads);
            emit_report(dir, rate_report(rc, run_rate_experiment(rc)));
            const auto wc = wasserstein_config(threads);
            emit_report(dir, donsker_report(wc, donsker_wasserstein(wc)));
            const auto dc = degenerate_config(threads);
            emit_report(dir, degenerate_report(dc, run_degenerate_suite(dc)));
            const auto cr = couple_run(rc);
            detail::write_file(dir / "coupled_path.csv", cr.path_csv);
            detail::write_file(dir / "coupled_levels.json", cr.levels.dump(2) + "\n");
            return dir;
        };
        const auto a = emit_all(1);
        const auto b = emit_all(4);
        std::size_t files = 0, differing = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++differing;
        }
        fs::remove_all(root);
        return Outcome{files >= 17 && differing == 0,
                       std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
