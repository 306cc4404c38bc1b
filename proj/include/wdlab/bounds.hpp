#pragma once

// Fuk-Nagaev type tail bounds for maxima of partial sums, their Monte Carlo
// counterparts, and the series diagnostics for complete convergence.
//
//   P(S_n* >= x) <= c1 1{sigma^2 > 0} (n sigma^2 / x^2)^4 exp(-x^2 / (16 n sigma^2))
//                 + c2 (n / x^4) (Theta_1 Theta_2 + sum_k k (k ^ x) theta(k))
//
// c1 and c2 are unknown numerical constants; fit_constants finds the
// smallest pair on a log grid that dominates Monte Carlo upper confidence
// limits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wdlab/coefficients.hpp"
#include "wdlab/error.hpp"
#include "wdlab/parallel.hpp"
#include "wdlab/processes.hpp"
#include "wdlab/stats.hpp"

namespace wdlab {

struct FukNagaevParams {
    double n = 1.0;
    double x = 1.0;
    double sigma2 = 0.0;
    double theta1 = 1.0;
    double theta2 = 1.0;
    double weighted_x = 0.0;
    double c1 = 1.0;
    double c2 = 1.0;

    void validate() const {
        if (!(n >= 1.0)) throw LabError("Fuk-Nagaev: n must be at least 1");
        if (!(x > 0.0)) throw LabError("Fuk-Nagaev: x must be positive");
        if (!(sigma2 >= 0.0)) throw LabError("Fuk-Nagaev: sigma2 must be nonnegative");
        if (!(theta1 >= 1.0) || !(theta2 >= 1.0)) throw LabError("Fuk-Nagaev: Theta_1 and Theta_2 must be at least 1");
        if (!std::isfinite(theta2) || !std::isfinite(weighted_x))
            throw LabError("Fuk-Nagaev: Theta_2 diverges under the declared tail");
        if (!(weighted_x >= 0.0)) throw LabError("Fuk-Nagaev: weighted series must be nonnegative");
        if (!(c1 > 0.0) || !(c2 > 0.0)) throw LabError("Fuk-Nagaev: constants must be positive");
    }
};

/// First term with c1 = 1 (zero when sigma2 = 0).
inline double fuk_nagaev_gaussian_term(double n, double x, double sigma2) {
    if (sigma2 <= 0.0) return 0.0;
    const double ratio = n * sigma2 / (x * x);
    return std::pow(ratio, 4) * std::exp(-x * x / (16.0 * n * sigma2));
}

/// Second term with c2 = 1.
inline double fuk_nagaev_polynomial_term(double n, double x, double theta1, double theta2, double weighted_x) {
    return n / std::pow(x, 4) * (theta1 * theta2 + weighted_x);
}

inline double fuk_nagaev_rhs(const FukNagaevParams& p) {
    p.validate();
    return p.c1 * fuk_nagaev_gaussian_term(p.n, p.x, p.sigma2) +
           p.c2 * fuk_nagaev_polynomial_term(p.n, p.x, p.theta1, p.theta2, p.weighted_x);
}

inline FukNagaevParams fuk_nagaev_params(double n, double x, double sigma2, const SeriesSummary& series, double c1 = 1.0,
                                         double c2 = 1.0) {
    FukNagaevParams p;
    p.n = n;
    p.x = x;
    p.sigma2 = std::max(0.0, sigma2);
    p.theta1 = series.theta1();
    p.theta2 = series.theta2();
    p.weighted_x = series.weighted(x);
    p.c1 = c1;
    p.c2 = c2;
    return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct PathExtremes {
    /// max_{0<=k<=n} S_k (includes S_0 = 0).
    double one_sided_max = 0.0;
    /// max_{1<=k<=n} |S_k|.
    double abs_max = 0.0;
    double final_sum = 0.0;
};

/// Replicate r of length n uses the stream {tail, n, r} of the seed, so the
/// result depends on neither the thread count nor on which levels x are
/// queried afterwards.
inline std::vector<PathExtremes> simulate_extremes(const Process& process, std::size_t n, std::uint64_t replicates,
                                                   std::uint64_t seed, unsigned threads = 1) {
    if (n == 0) throw LabError("simulate_extremes: n must be at least 1");
    std::vector<PathExtremes> out(replicates);
    const auto* chain = std::get_if<FiniteChain>(&process);
    std::optional<ChainSampler> sampler;
    if (chain) sampler.emplace(*chain);
    constexpr std::uint64_t chunk = 1024;
    const std::uint64_t chunks = (replicates + chunk - 1) / chunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::uint64_t end = std::min<std::uint64_t>(replicates, (c + 1) * chunk);
        for (std::uint64_t r = c * chunk; r < end; ++r) {
            Walker walker(process, seed, {tag::tail, n, r}, sampler ? &*sampler : nullptr);
            PathExtremes e;
            if (chain) {
                std::int64_t s = 0, hi = 0, abs_hi = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += walker.next_units();
                    hi = std::max(hi, s);
                    abs_hi = std::max(abs_hi, s < 0 ? -s : s);
                }
                e.one_sided_max = static_cast<double>(hi) * chain->step;
                e.abs_max = static_cast<double>(abs_hi) * chain->step;
                e.final_sum = static_cast<double>(s) * chain->step;
            } else {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += walker.next();
                    e.one_sided_max = std::max(e.one_sided_max, s);
                    e.abs_max = std::max(e.abs_max, std::abs(s));
                }
                e.final_sum = s;
            }
            out[r] = e;
        }
    });
    return out;
}

/// Which maximal statistic and comparison an estimate refers to.
enum class TailEvent {
    /// max_{0<=k<=n} S_k >= x
    one_sided_at_least,
    /// max_{1<=k<=n} |S_k| > x
    absolute_exceeds,
};

struct TailEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t replicates = 0;
    std::uint64_t exceedances = 0;
    std::size_t n = 0;
    double x = 0.0;
};

inline TailEstimate tail_from_extremes(const std::vector<PathExtremes>& paths, std::size_t n, double x,
                                       TailEvent event = TailEvent::one_sided_at_least) {
    TailEstimate t;
    t.n = n;
    t.x = x;
    t.replicates = paths.size();
    for (const auto& e : paths) {
        const bool hit = event == TailEvent::one_sided_at_least ? e.one_sided_max >= x : e.abs_max > x;
        t.exceedances += hit ? 1 : 0;
    }
    t.p_hat = static_cast<double>(t.exceedances) / static_cast<double>(t.replicates);
    const auto ci = clopper_pearson(t.exceedances, t.replicates);
    t.ci_low = ci.low;
    t.ci_high = ci.high;
    return t;
}

/// P(S_n* >= x) estimated from `replicates` independent stationary paths.
inline TailEstimate empirical_tail(const Process& process, std::size_t n, double x, std::uint64_t replicates,
                                   std::uint64_t seed, unsigned threads = 1) {
    if (replicates < 100) throw LabError("empirical_tail: at least 100 replicates are required");
    return tail_from_extremes(simulate_extremes(process, n, replicates, seed, threads), n, x);
}

/// Several levels at one n, sharing the same paths.
inline std::vector<TailEstimate> empirical_tails(const Process& process, std::size_t n, const std::vector<double>& xs,
                                                 std::uint64_t replicates, std::uint64_t seed, unsigned threads = 1,
                                                 TailEvent event = TailEvent::one_sided_at_least) {
    if (replicates < 100) throw LabError("empirical_tails: at least 100 replicates are required");
    const auto paths = simulate_extremes(process, n, replicates, seed, threads);
    std::vector<TailEstimate> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(tail_from_extremes(paths, n, x, event));
    return out;
}

// ---------------------------------------------------------------------------
// Constant fitting

struct GridPoint {
    std::size_t n = 1;
    double x = 1.0;
};

struct BoundPoint {
    GridPoint at;
    TailEstimate tail;
    /// Gaussian and polynomial terms with unit constants.
    double gaussian = 0.0;
    double polynomial = 0.0;
    double rhs = 0.0;
    bool dominated = false;
    bool binding = false;
};

struct FittedConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    /// sigma^2 = 0 removes the first term, so c1 is not identified.
    bool c1_irrelevant = false;
    std::vector<BoundPoint> points;
    std::vector<std::size_t> binding;
};

namespace detail {

inline constexpr double constant_floor = 1e-3;
inline constexpr double constant_ceiling = 1e6;
inline constexpr int steps_per_decade = 10;

inline double grid_constant(int j) { return constant_floor * std::pow(10.0, static_cast<double>(j) / steps_per_decade); }
inline int grid_steps() { return 9 * steps_per_decade; }

/// Smallest grid index j with grid_constant(j) >= value, or -1 if none.
inline int snap_up(double value) {
    if (value <= constant_floor) return 0;
    const double raw = std::log10(value / constant_floor) * steps_per_decade;
    int j = static_cast<int>(std::ceil(raw - 1e-9));
    while (j > 0 && grid_constant(j - 1) >= value) --j;
    while (j <= grid_steps() && grid_constant(j) < value) ++j;
    return j <= grid_steps() ? j : -1;
}

}  // namespace detail

/// Evaluate the bound and Monte Carlo tails on a grid of (n, x).
///
/// Points sharing n share their simulated paths.
inline std::vector<BoundPoint> evaluate_grid(const Process& process, const std::vector<GridPoint>& grid, double sigma2,
                                             const SeriesSummary& series, std::uint64_t replicates, std::uint64_t seed,
                                             unsigned threads = 1) {
    if (grid.empty()) throw LabError("evaluate_grid: empty grid");
    std::vector<BoundPoint> out(grid.size());
    std::vector<std::size_t> ns;
    for (const auto& g : grid) ns.push_back(g.n);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (std::size_t n : ns) {
        const auto paths = simulate_extremes(process, n, replicates, seed, threads);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i].n != n) continue;
            auto& bp = out[i];
            bp.at = grid[i];
            bp.tail = tail_from_extremes(paths, n, grid[i].x);
            const auto p = fuk_nagaev_params(static_cast<double>(n), grid[i].x, sigma2, series);
            p.validate();
            bp.gaussian = fuk_nagaev_gaussian_term(p.n, p.x, p.sigma2);
            bp.polynomial = fuk_nagaev_polynomial_term(p.n, p.x, p.theta1, p.theta2, p.weighted_x);
        }
    }
    return out;
}

/// Mark each point dominated (rhs >= ci_high) under the given constants.
inline bool check_dominance(std::vector<BoundPoint>& points, double c1, double c2) {
    bool all = true;
    for (auto& p : points) {
        p.rhs = c1 * p.gaussian + c2 * p.polynomial;
        p.dominated = p.rhs >= p.tail.ci_high;
        all = all && p.dominated;
    }
    return all;
}

/// Smallest (c1, c2) on the log grid [1e-3, 1e6]^2 (ten steps per decade)
/// with c1 G + c2 P >= ci_high at every point. Among feasible pairs the one
/// with the smallest max(c1, c2) is returned, then the smallest product, then
/// the smallest c1. Balancing the two constants keeps both terms of the bound
/// active, so it follows the Gaussian regime as well as the polynomial one.
/// A point is binding when lowering either constant by one grid step would
/// leave it undominated.
inline FittedConstants fit_constants_on(std::vector<BoundPoint> points, bool sigma2_positive) {
    FittedConstants fit;
    fit.c1_irrelevant = !sigma2_positive;
    int best_c1 = -1, best_c2 = -1;
    for (int j1 = 0; j1 <= detail::grid_steps(); ++j1) {
        const double c1 = detail::grid_constant(j1);
        double need = 0.0;
        bool feasible = true;
        for (const auto& p : points) {
            const double residual = p.tail.ci_high - (sigma2_positive ? c1 * p.gaussian : 0.0);
            if (residual <= 0.0) continue;
            if (p.polynomial <= 0.0) {
                feasible = false;
                break;
            }
            need = std::max(need, residual / p.polynomial);
        }
        if (!feasible) continue;
        const int j2 = detail::snap_up(need);
        if (j2 < 0) continue;
        const auto worse = [](int a1, int a2, int b1, int b2) {
            return std::max(a1, a2) != std::max(b1, b2) ? std::max(a1, a2) > std::max(b1, b2) : a1 + a2 > b1 + b2;
        };
        if (best_c1 < 0 || worse(best_c1, best_c2, j1, j2)) {
            best_c1 = j1;
            best_c2 = j2;
        }
        if (!sigma2_positive) break;
    }
    if (best_c1 < 0) throw LabError("fit_constants: no finite constants found within the search box [1e-3, 1e6]^2");
    fit.c1 = detail::grid_constant(best_c1);
    fit.c2 = detail::grid_constant(best_c2);
    check_dominance(points, fit.c1, fit.c2);
    const double c1_down = best_c1 > 0 ? detail::grid_constant(best_c1 - 1) : 0.0;
    const double c2_down = best_c2 > 0 ? detail::grid_constant(best_c2 - 1) : 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& p = points[i];
        const bool c2_binds = best_c2 > 0 && fit.c1 * p.gaussian + c2_down * p.polynomial < p.tail.ci_high;
        const bool c1_binds =
            sigma2_positive && best_c1 > 0 && c1_down * p.gaussian + fit.c2 * p.polynomial < p.tail.ci_high;
        p.binding = c1_binds || c2_binds;
        if (p.binding) fit.binding.push_back(i);
    }
    fit.points = std::move(points);
    return fit;
}

inline FittedConstants fit_constants(const Process& process, const std::vector<GridPoint>& grid, double sigma2,
                                     const SeriesSummary& series, std::uint64_t replicates, std::uint64_t seed,
                                     unsigned threads = 1) {
    return fit_constants_on(evaluate_grid(process, grid, sigma2, series, replicates, seed, threads), sigma2 > 0.0);
}

/// Training and holdout grids with x log-spaced in [2 sqrt(n), n sup_norm / 2].
///
/// Training points include both ends of the range (fractions i / (k - 1) of
/// the log range); holdout points sit at fractions (i + 1/2) / k, so they
/// are disjoint from and interleaved inside the training range.
inline std::pair<std::vector<GridPoint>, std::vector<GridPoint>> split_grid(const std::vector<std::size_t>& ns,
                                                                            std::size_t per_n_each, double sup_norm) {
    if (per_n_each < 2) throw LabError("split_grid: need at least two points per n");
    std::vector<GridPoint> train, holdout;
    for (std::size_t n : ns) {
        const double lo = 2.0 * std::sqrt(static_cast<double>(n));
        const double hi = static_cast<double>(n) * sup_norm / 2.0;
        if (!(hi > lo)) throw LabError("split_grid: n too small for the x range");
        const double k = static_cast<double>(per_n_each);
        for (std::size_t i = 0; i < per_n_each; ++i) {
            const double at = static_cast<double>(i);
            train.push_back({n, lo * std::pow(hi / lo, at / (k - 1.0))});
            holdout.push_back({n, lo * std::pow(hi / lo, (at + 0.5) / k)});
        }
    }
    return {train, holdout};
}

// ---------------------------------------------------------------------------
// Series diagnostics

struct SeriesRow {
    std::size_t n = 0;
    double level = 0.0;
    TailEstimate tail;
    double summand = 0.0;
    double summand_low = 0.0;
    double summand_high = 0.0;
};

struct SeriesCheck {
    double alpha = 0.0;
    double p = 0.0;
    double epsilon = 0.0;
    bool degenerate = false;
    std::vector<SeriesRow> rows;
    /// Last summand below the first (a qualitative diagnostic, not a proof).
    bool decaying = false;
    /// Degenerate case with a pathwise bound: first n whose level clears it.
    std::optional<std::size_t> pathwise_zero_from;
    /// All summands at or past pathwise_zero_from are exactly zero.
    bool zero_beyond_bound = true;
};

/// Summands n^{alpha p - 2} P(S_n* >= eps n^alpha). In the degenerate case the
/// event is max |S_k| > eps n^alpha and alpha may lie anywhere in (0, 1).
inline SeriesCheck series_convergence_check(const Process& process, double alpha, double p, double epsilon,
                                            const std::vector<std::size_t>& n_list, std::uint64_t replicates,
                                            std::uint64_t seed, bool degenerate = false, unsigned threads = 1) {
    if (degenerate) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw LabError("series_convergence_check: alpha must lie in (0, 1)");
    } else if (!(alpha > 0.5 && alpha <= 1.0)) {
        throw LabError("series_convergence_check: alpha must lie in (1/2, 1]");
    }
    if (!(epsilon > 0.0)) throw LabError("series_convergence_check: epsilon must be positive");
    if (n_list.empty()) throw LabError("series_convergence_check: empty n_list");
    SeriesCheck check{alpha, p, epsilon, degenerate, {}, false, std::nullopt, true};
    std::optional<double> bound;
    if (const auto* chain = std::get_if<FiniteChain>(&process)) bound = chain->partial_sum_bound;
    const auto event = degenerate ? TailEvent::absolute_exceeds : TailEvent::one_sided_at_least;
    for (std::size_t n : n_list) {
        SeriesRow row;
        row.n = n;
        row.level = epsilon * std::pow(static_cast<double>(n), alpha);
        row.tail = empirical_tails(process, n, {row.level}, replicates, seed, threads, event).front();
        const double weight = std::pow(static_cast<double>(n), alpha * p - 2.0);
        row.summand = weight * row.tail.p_hat;
        row.summand_low = weight * row.tail.ci_low;
        row.summand_high = weight * row.tail.ci_high;
        if (degenerate && bound && row.level >= *bound) {
            if (!check.pathwise_zero_from) check.pathwise_zero_from = n;
            check.zero_beyond_bound = check.zero_beyond_bound && row.tail.exceedances == 0;
        }
        check.rows.push_back(row);
    }
    check.decaying = check.rows.back().summand < check.rows.front().summand || check.rows.back().summand == 0.0;
    return check;
}

struct MomentRow {
    std::size_t n = 0;
    double moment = 0.0;
    double moment_se = 0.0;
    double bound = 0.0;
    bool below_bound = false;
    /// ||S_n*||_r with S_n* = max_{k<=n} |S_k|.
    double max_norm = 0.0;
    /// C n^{1/p} with C fitted at the smallest n.
    double reference = 0.0;
};

struct MomentCheck {
    double q = 0.0;
    double r = 0.0;
    double p = 0.0;
    double bound = 0.0;
    std::vector<MomentRow> rows;
    bool all_below_bound = true;
    /// Fitted growth exponent of ||S_n*||_r in n (absent when every norm is 0).
    std::optional<PowerFit> growth;
};

/// Monte Carlo E|S_n|^q against q (2M)^q sum (k+1)^{q-1} theta_{1,1}(k), and
/// the growth of ||S_n*||_r, for a chain with sigma^2 = 0.
inline MomentCheck degenerate_moment_check(const FiniteChain& chain, double q, const std::vector<std::size_t>& n_list,
                                           std::uint64_t replicates, std::uint64_t seed, double r = 2.0,
                                           double p = 4.0, unsigned threads = 1, std::size_t theta_horizon = 24) {
    if (!(q >= 1.0)) throw LabError("degenerate_moment_check: q must be at least 1");
    if (n_list.empty()) throw LabError("degenerate_moment_check: empty n_list");
    const bool all_zero = std::all_of(chain.units.begin(), chain.units.end(), [](auto u) { return u == 0; });
    if (!all_zero && sigma2_exact(chain).value > 1e-6) throw LabError("process not degenerate");

    MomentCheck check;
    check.q = q;
    check.r = r;
    check.p = p;
    ThetaTable table;
    table.kind = "theta_{1,1}";
    for (std::size_t k = 0; k <= theta_horizon; ++k)
        table.values.push_back(theta_exact(chain, 1, 1, static_cast<std::int64_t>(k), 0));
    table.tail = spectral_tail(chain, table.values);
    check.bound = degenerate_moment_bound(chain.sup_norm, q, table);

    const Process process{chain};
    std::vector<double> ns, norms, log_se;
    for (std::size_t n : n_list) {
        const auto paths = simulate_extremes(process, n, replicates, seed, threads);
        RunningMoments moment, max_power;
        for (const auto& e : paths) {
            moment.add(std::pow(std::abs(e.final_sum), q));
            max_power.add(std::pow(e.abs_max, r));
        }
        MomentRow row;
        row.n = n;
        row.moment = moment.mean;
        row.moment_se = moment.standard_error();
        row.bound = check.bound;
        row.below_bound = row.moment <= check.bound;
        row.max_norm = std::pow(max_power.mean, 1.0 / r);
        check.all_below_bound = check.all_below_bound && row.below_bound;
        check.rows.push_back(row);
        ns.push_back(static_cast<double>(n));
        norms.push_back(row.max_norm);
        // delta method: se(log ||.||_r) = se(mean) / (r mean)
        log_se.push_back(max_power.mean > 0 ? max_power.standard_error() / (r * max_power.mean) : 0.0);
    }
    const double c = check.rows.front().max_norm / std::pow(ns.front(), 1.0 / p);
    for (auto& row : check.rows) row.reference = c * std::pow(static_cast<double>(row.n), 1.0 / p);
    if (ns.size() >= 2 && std::all_of(norms.begin(), norms.end(), [](double v) { return v > 0.0; }))
        check.growth = fit_power_law(ns, norms, log_se);
    return check;
}

}  // namespace wdlab
