#pragma once

// Dyadic strong-approximation coupling of a lattice Markov chain with an
// i.i.d. N(0, sigma^2) sequence.
//
// Indices ]2^L, 2^{L+1}] form level L, cut into blocks
//     I_{k,L} = ]2^L + (k-1) 2^m, 2^L + k 2^m],  m = m(L).
// Each block sum U is mapped through the exact conditional law of U given the
// block-start state (randomized at atoms) and the Gaussian quantile,
//     V = sigma 2^{m/2} Phi^{-1}(F(U-) + delta (F(U) - F(U-))),
// which is N(0, sigma^2 2^m) and independent of the past. V is then split
// into 2^m i.i.d. N(0, sigma^2) increments that sum to V.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdlab/error.hpp"
#include "wdlab/normal.hpp"
#include "wdlab/processes.hpp"
#include "wdlab/rng.hpp"

namespace wdlab {

// ---------------------------------------------------------------------------
// Schedules

enum class ScheduleVariant { balanced, inflated, log_inflated };

inline std::string to_string(ScheduleVariant v) {
    switch (v) {
        case ScheduleVariant::balanced: return "balanced";
        case ScheduleVariant::inflated: return "inflated";
        case ScheduleVariant::log_inflated: return "log_inflated";
    }
    return "balanced";
}

inline ScheduleVariant parse_schedule_variant(const std::string& s) {
    if (s == "balanced") return ScheduleVariant::balanced;
    if (s == "inflated") return ScheduleVariant::inflated;
    if (s == "log_inflated" || s == "log-inflated") return ScheduleVariant::log_inflated;
    throw LabError("unknown schedule variant '" + s + "'");
}

struct CouplingSchedule {
    int top_level = 0;  // N; levels are 0..N and n = 2^{N+1}
    double p = 4.0;
    ScheduleVariant variant = ScheduleVariant::balanced;
    double epsilon = 0.0;
    double c_fit = 1.0;
    std::vector<int> m;
    std::vector<double> lambda;

    std::size_t length() const { return std::size_t{1} << (top_level + 1); }
};

/// m(L) = [2(L - log2 L)/p], [2(L + eps log2 L)/p] or [2(L + (1+eps) log2 L)/p],
/// clamped to [0, L]; lambda_L = sqrt(2 c log 2) 2^{m/2} sqrt(L).
inline CouplingSchedule make_schedule(int top_level, double p, ScheduleVariant variant = ScheduleVariant::balanced,
                                      double epsilon = 0.0, double c_fit = 1.0) {
    if (top_level < 0) throw LabError("make_schedule: N must be nonnegative");
    if (!(p > 2.0 && p <= 4.0)) throw LabError("make_schedule: p must lie in (2, 4]");
    if (variant != ScheduleVariant::balanced && !(epsilon > 0.0))
        throw LabError("make_schedule: epsilon must be positive for inflated schedules");
    if (!(c_fit > 0.0)) throw LabError("make_schedule: c_fit must be positive");
    CouplingSchedule s;
    s.top_level = top_level;
    s.p = p;
    s.variant = variant;
    s.epsilon = epsilon;
    s.c_fit = c_fit;
    const double kappa = std::sqrt(2.0 * c_fit * std::log(2.0));
    for (int level = 0; level <= top_level; ++level) {
        int m = 0;
        if (level >= 1) {
            const double l = level, lg = std::log2(l);
            double arg = 0.0;
            switch (variant) {
                case ScheduleVariant::balanced: arg = 2.0 * (l - lg) / p; break;
                case ScheduleVariant::inflated: arg = 2.0 * (l + epsilon * lg) / p; break;
                case ScheduleVariant::log_inflated: arg = 2.0 * (l + (1.0 + epsilon) * lg) / p; break;
            }
            m = std::clamp(static_cast<int>(std::floor(arg + 1e-12)), 0, level);
        }
        s.m.push_back(m);
        s.lambda.push_back(kappa * std::pow(2.0, m / 2.0) * std::sqrt(static_cast<double>(level)));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Block-sum laws

/// Law of (sum of X over 2^m steps, end state) from one start state, on a
/// dense grid of lattice sums. Scalar may be an exact rational type.
template <class Scalar>
struct BlockLaw {
    std::int64_t min_units = 0;
    std::size_t sums = 0;
    std::size_t states = 0;
    std::vector<Scalar> mass;  // index (sum - min_units) * states + end

    const Scalar& at(std::int64_t sum, std::size_t end) const {
        return mass[static_cast<std::size_t>(sum - min_units) * states + end];
    }
    Scalar total() const {
        Scalar acc(0);
        for (const auto& v : mass) acc += v;
        return acc;
    }
};

namespace detail {

inline constexpr double atom_budget = 1e7;

inline std::pair<std::int64_t, std::int64_t> unit_range(const FiniteChain& chain) {
    const auto [lo, hi] = std::minmax_element(chain.units.begin(), chain.units.end());
    return {*lo, *hi};
}

inline void check_atom_budget(const FiniteChain& chain, int m) {
    if (m < 0) throw LabError("block_sum_dist: m must be nonnegative");
    if (m > 40) throw LabError("block_sum_dist: atom budget exceeded; use a smaller m or a coarser lattice");
    const auto [lo, hi] = unit_range(chain);
    const double atoms = (std::ldexp(1.0, m) * static_cast<double>(hi - lo) + 1.0) * static_cast<double>(chain.size());
    if (atoms > atom_budget)
        throw LabError("block_sum_dist: atom budget exceeded (" + std::to_string(atoms) +
                       " atoms); use a smaller m or a coarser lattice");
}

}  // namespace detail

/// Forward DP one transition at a time.
template <class Scalar>
BlockLaw<Scalar> block_law_stepwise(const FiniteChain& chain, std::size_t start, int m) {
    detail::check_atom_budget(chain, m);
    if (start >= chain.size()) throw LabError("block_sum_dist: unknown start state");
    const std::size_t states = chain.size();
    const std::size_t length = std::size_t{1} << m;
    const auto [lo, hi] = detail::unit_range(chain);
    BlockLaw<Scalar> law;
    law.states = states;
    law.min_units = static_cast<std::int64_t>(length) * lo;
    law.sums = static_cast<std::size_t>(static_cast<std::int64_t>(length) * (hi - lo)) + 1;

    std::vector<std::vector<Scalar>> p(states, std::vector<Scalar>(states));
    for (std::size_t r = 0; r < states; ++r)
        for (std::size_t t = 0; t < states; ++t)
            p[r][t] = Scalar(chain.transition(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)));

    // Sums after j steps lie in [j lo, j hi]; index by offset from the final minimum.
    // Offsets count sum - j lo after j steps, so every step adds u - lo >= 0.
    std::vector<Scalar> cur(law.sums * states, Scalar(0)), next(law.sums * states, Scalar(0));
    for (std::size_t t = 0; t < states; ++t)
        if (p[start][t] != Scalar(0)) cur[static_cast<std::size_t>(chain.units[t] - lo) * states + t] += p[start][t];
    const std::int64_t span = hi - lo;
    for (std::size_t step = 1; step < length; ++step) {
        std::fill(next.begin(), next.end(), Scalar(0));
        const std::size_t reach = static_cast<std::size_t>(span * static_cast<std::int64_t>(step)) + 1;
        for (std::size_t off = 0; off < reach; ++off)
            for (std::size_t r = 0; r < states; ++r) {
                const Scalar& w = cur[off * states + r];
                if (w == Scalar(0)) continue;
                for (std::size_t t = 0; t < states; ++t) {
                    if (p[r][t] == Scalar(0)) continue;
                    next[(off + static_cast<std::size_t>(chain.units[t] - lo)) * states + t] += w * p[r][t];
                }
            }
        std::swap(cur, next);
    }
    law.mass = std::move(cur);
    return law;
}

/// Length-doubling convolution: laws of 2^{j+1}-step blocks from all start
/// states are products of 2^j-step laws through the middle state.
template <class Scalar>
BlockLaw<Scalar> block_law_doubling(const FiniteChain& chain, std::size_t start, int m) {
    detail::check_atom_budget(chain, m);
    if (start >= chain.size()) throw LabError("block_sum_dist: unknown start state");
    const std::size_t states = chain.size();
    const auto [lo, hi] = detail::unit_range(chain);
    const std::size_t span = static_cast<std::size_t>(hi - lo);
    // poly[s][t][off]: P(sum = len lo + off, end = t | start = s)
    using Poly = std::vector<Scalar>;
    std::vector<std::vector<Poly>> poly(states, std::vector<Poly>(states, Poly(span + 1, Scalar(0))));
    for (std::size_t s = 0; s < states; ++s)
        for (std::size_t t = 0; t < states; ++t)
            poly[s][t][static_cast<std::size_t>(chain.units[t] - lo)] =
                Scalar(chain.transition(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)));
    std::size_t len = 1;
    for (int j = 0; j < m; ++j) {
        const std::size_t width = span * len + 1;
        const std::size_t out_width = span * 2 * len + 1;
        std::vector<std::vector<Poly>> doubled(states, std::vector<Poly>(states, Poly(out_width, Scalar(0))));
        for (std::size_t s = 0; s < states; ++s)
            for (std::size_t r = 0; r < states; ++r)
                for (std::size_t t = 0; t < states; ++t) {
                    const Poly& a = poly[s][r];
                    const Poly& b = poly[r][t];
                    Poly& out = doubled[s][t];
                    for (std::size_t i = 0; i < width; ++i) {
                        if (a[i] == Scalar(0)) continue;
                        for (std::size_t k = 0; k < width; ++k)
                            if (b[k] != Scalar(0)) out[i + k] += a[i] * b[k];
                    }
                }
        poly = std::move(doubled);
        len *= 2;
    }
    BlockLaw<Scalar> law;
    law.states = states;
    law.min_units = static_cast<std::int64_t>(len) * lo;
    law.sums = span * len + 1;
    law.mass.assign(law.sums * states, Scalar(0));
    for (std::size_t off = 0; off < law.sums; ++off)
        for (std::size_t t = 0; t < states; ++t) law.mass[off * states + t] = poly[start][t][off];
    return law;
}

struct BlockAtom {
    std::int64_t units = 0;
    double prob = 0.0;
    /// Probability split by end state (empty for hand-built laws).
    std::vector<double> by_end;
};

struct BlockDist {
    std::size_t start_state = 0;
    int m = 0;
    double step = 1.0;
    std::vector<BlockAtom> atoms;  // ascending units, positive mass
    std::vector<double> cdf;       // mass of atoms <= atoms[i]
    std::vector<double> upper;     // mass of atoms > atoms[i], summed from the top

    std::size_t length() const { return std::size_t{1} << m; }
    double value(std::size_t i) const { return static_cast<double>(atoms[i].units) * step; }
    double total_mass() const { return cdf.empty() ? 0.0 : cdf.back(); }
    double mean() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) acc += value(i) * atoms[i].prob;
        return acc;
    }

    /// Index of the first atom with value >= u (atoms.size() if none).
    std::size_t position(double u) const {
        const double tol = 1e-9 * std::max(1.0, std::abs(u));
        return static_cast<std::size_t>(
            std::lower_bound(atoms.begin(), atoms.end(), u - tol,
                             [&](const BlockAtom& a, double x) { return static_cast<double>(a.units) * step < x; }) -
            atoms.begin());
    }
    bool is_atom(std::size_t i, double u) const {
        return i < atoms.size() && std::abs(value(i) - u) <= 1e-9 * std::max(1.0, std::abs(u));
    }
    /// F(u-)
    double cdf_below(double u) const {
        const std::size_t i = position(u);
        return i == 0 ? 0.0 : cdf[i - 1];
    }
    /// 1 - F(u)
    double survival_above(double u) const {
        const std::size_t i = position(u);
        if (i >= atoms.size()) return 0.0;
        return is_atom(i, u) ? upper[i] : upper[i] + atoms[i].prob;
    }
};

/// Finalize cumulative tables of a law with atoms already sorted.
inline BlockDist finish_block_dist(BlockDist d) {
    d.cdf.resize(d.atoms.size());
    d.upper.resize(d.atoms.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) d.cdf[i] = (acc += d.atoms[i].prob);
    acc = 0.0;
    for (std::size_t i = d.atoms.size(); i-- > 0;) {
        d.upper[i] = acc;
        acc += d.atoms[i].prob;
    }
    return d;
}

/// A distribution on the lattice of the given step from (units, probability) pairs.
inline BlockDist make_block_dist(double step, std::vector<std::pair<std::int64_t, double>> atoms, int m = 0) {
    if (atoms.empty()) throw LabError("make_block_dist: no atoms");
    std::sort(atoms.begin(), atoms.end());
    BlockDist d;
    d.step = step;
    d.m = m;
    for (const auto& [u, pr] : atoms) {
        if (!(pr > 0.0)) throw LabError("make_block_dist: probabilities must be positive");
        if (!d.atoms.empty() && d.atoms.back().units == u) throw LabError("make_block_dist: duplicate atom");
        d.atoms.push_back({u, pr, {}});
    }
    return finish_block_dist(std::move(d));
}

inline BlockDist to_block_dist(const FiniteChain& chain, std::size_t start, int m, const BlockLaw<double>& law) {
    BlockDist d;
    d.start_state = start;
    d.m = m;
    d.step = chain.step;
    for (std::size_t off = 0; off < law.sums; ++off) {
        double total = 0.0;
        for (std::size_t t = 0; t < law.states; ++t) total += law.mass[off * law.states + t];
        if (total <= 0.0) continue;
        BlockAtom a;
        a.units = law.min_units + static_cast<std::int64_t>(off);
        a.prob = total;
        a.by_end.assign(law.mass.begin() + static_cast<std::ptrdiff_t>(off * law.states),
                        law.mass.begin() + static_cast<std::ptrdiff_t>((off + 1) * law.states));
        d.atoms.push_back(std::move(a));
    }
    return finish_block_dist(std::move(d));
}

enum class BlockRoute { automatic, stepwise, doubling };

/// Exact conditional law of the sum of X over 2^m steps given the start state.
inline BlockDist block_sum_dist(const FiniteChain& chain, std::size_t start, int m,
                                BlockRoute route = BlockRoute::automatic) {
    if (route == BlockRoute::automatic) {
        // Stepwise costs ~ S^2 4^m span / 2, doubling ~ S^3 4^m span^2 / 3.
        const auto [lo, hi] = detail::unit_range(chain);
        const double s = static_cast<double>(chain.size()), span = static_cast<double>(std::max<std::int64_t>(1, hi - lo));
        route = s * span * 2.0 / 3.0 < 1.0 ? BlockRoute::doubling : BlockRoute::stepwise;
    }
    const auto law = route == BlockRoute::doubling ? block_law_doubling<double>(chain, start, m)
                                                   : block_law_stepwise<double>(chain, start, m);
    return to_block_dist(chain, start, m, law);
}

/// All start states for every distinct m of a schedule, computed once and
/// shared read-only by the replicates.
class BlockDistCache {
public:
    BlockDistCache(const FiniteChain& chain, const std::vector<int>& ms) {
        for (int m : ms) {
            if (table_.count(m)) continue;
            auto& row = table_[m];
            for (std::size_t s = 0; s < chain.size(); ++s) row.push_back(block_sum_dist(chain, s, m));
        }
    }
    const BlockDist& get(std::size_t start, int m) const {
        const auto it = table_.find(m);
        if (it == table_.end()) throw LabError("BlockDistCache: block exponent not prepared");
        return it->second.at(start);
    }

private:
    std::map<int, std::vector<BlockDist>> table_;
};

// ---------------------------------------------------------------------------
// Quantile transform and Gaussian split

inline constexpr double quantile_clamp = 8.2;

/// sigma 2^{m/2} Phi^{-1}(F(u-) + delta (F(u) - F(u-))), with the Gaussian
/// argument clamped to +-8.2 standard deviations.
inline double conditional_quantile_gaussian(double u, const BlockDist& dist, double sigma2, int m, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw LabError("conditional_quantile_gaussian: delta must lie in (0, 1)");
    if (!(sigma2 > 0.0)) throw LabError("conditional_quantile_gaussian: sigma2 must be positive");
    const std::size_t i = dist.position(u);
    const double below = i == 0 ? 0.0 : dist.cdf[i - 1];
    double t = below, c = 0.0;
    if (dist.is_atom(i, u)) {
        const double pr = dist.atoms[i].prob;
        t = below + delta * pr;
        c = dist.upper[i] + (1.0 - delta) * pr;
    } else if (i < dist.atoms.size()) {
        c = dist.upper[i] + dist.atoms[i].prob;
    }
    if (t <= 0.0) throw LabError("conditional_quantile_gaussian: u lies below the support of the block law");
    const double z = std::clamp(inverse_normal_cdf(t, c), -quantile_clamp, quantile_clamp);
    return std::sqrt(sigma2 * std::ldexp(1.0, m)) * z;
}

/// 2^m i.i.d. N(0, sigma^2) increments conditioned to sum to v:
/// N_i = v / 2^m + (G_i - mean G), the last one absorbing the rounding residual.
inline std::vector<double> skorohod_split(double v, int m, double sigma2, Stream& stream) {
    if (!(sigma2 > 0.0)) throw LabError("skorohod_split: sigma2 must be positive");
    if (m < 0) throw LabError("skorohod_split: m must be nonnegative");
    const std::size_t count = std::size_t{1} << m;
    if (count == 1) return {v};
    const double sigma = std::sqrt(sigma2);
    std::vector<double> g(count);
    long double sum = 0.0L;
    for (auto& x : g) {
        x = sigma * standard_normal(stream);
        sum += x;
    }
    const double centre = static_cast<double>(sum / static_cast<long double>(count));
    const double share = v / static_cast<double>(count);
    long double total = 0.0L;
    for (auto& x : g) {
        x = share + (x - centre);
        total += x;
    }
    g.back() += static_cast<double>(static_cast<long double>(v) - total);
    return g;
}

/// Squared Wasserstein-2 distance between a lattice law and N(0, variance):
/// the L^2 distance of quantile functions, integrated in closed form per atom.
inline double w2_conditional(const BlockDist& dist, double target_variance) {
    if (!(target_variance > 0.0)) throw LabError("w2_conditional: target variance must be positive");
    const double s = std::sqrt(target_variance);
    const auto edge = [](double t, double c) { return inverse_normal_cdf(t, c); };
    const auto phi = [](double z) { return std::isfinite(z) ? normal_pdf(z) : 0.0; };
    const auto zphi = [](double z) { return std::isfinite(z) ? z * normal_pdf(z) : 0.0; };
    double total = 0.0;
    double below = 0.0;
    for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
        const double pr = dist.atoms[i].prob;
        const double a = edge(below, dist.upper[i] + pr);
        const double b = edge(dist.cdf[i], dist.upper[i]);
        const double u = dist.value(i);
        // int_a^b (u - s z)^2 phi(z) dz
        total += u * u * pr - 2.0 * u * s * (phi(a) - phi(b)) + target_variance * (pr + zphi(a) - zphi(b));
        below = dist.cdf[i];
    }
    return total;
}

// ---------------------------------------------------------------------------
// Coupled paths

struct LevelStats {
    int level = 0;
    int m = 0;
    double d = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

struct BlockRecord {
    int level = 0;
    std::size_t k = 0;
    int m = 0;
    std::size_t start_state = 0;
    /// S at the block start (time 2^L + (k-1) 2^m).
    double start_sum = 0.0;
    double u = 0.0;
    double v = 0.0;
};

struct CoupledPath {
    /// Built length 2^{N+1}.
    std::size_t n = 0;
    /// Reporting horizon, at most n.
    std::size_t horizon = 0;
    std::vector<double> x, z, s, t;  // index 0 is a placeholder / S_0 = T_0 = 0
    std::vector<BlockRecord> blocks;
    std::vector<LevelStats> levels;
    double first_error = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
};

struct CouplingOptions {
    /// Debug mode: Z = X, so T = S.
    bool identity = false;
    /// Keep per-block records.
    bool record_blocks = true;
};

/// One coupled path of length 2^{N+1}. The path uses the stream
/// {path, n, replicate}; Z_1 uses {first_gaussian, n, replicate}; block (L, k)
/// uses {block, n, replicate, L, k}, first draw delta, then the split.
inline CoupledPath build_coupling(const FiniteChain& chain, const CouplingSchedule& schedule, double sigma2,
                                  std::size_t horizon, std::uint64_t seed, std::uint64_t replicate,
                                  const BlockDistCache& cache, CouplingOptions options = {},
                                  const ChainSampler* sampler = nullptr) {
    if (!(sigma2 > 0.0)) throw LabError("degenerate process: coupling undefined");
    const std::size_t n = schedule.length();
    if (horizon == 0 || horizon > n) throw LabError("build_coupling: horizon must lie in [1, 2^{N+1}]");
    CoupledPath path;
    path.n = n;
    path.horizon = horizon;
    path.seed = seed;
    path.replicate = replicate;
    path.x.assign(n + 1, 0.0);
    path.z.assign(n + 1, 0.0);
    path.s.assign(n + 1, 0.0);
    path.t.assign(n + 1, 0.0);

    std::vector<std::size_t> state(n + 1);
    std::vector<std::int64_t> sum_units(n + 1, 0);
    {
        std::optional<ChainSampler> own;
        if (!sampler) sampler = &own.emplace(chain);
        Stream stream(seed, {tag::path, n, replicate});
        state[0] = sampler->initial(stream);
        for (std::size_t i = 1; i <= n; ++i) {
            state[i] = sampler->next(state[i - 1], stream);
            sum_units[i] = sum_units[i - 1] + chain.units[state[i]];
            path.x[i] = chain.value(state[i]);
            path.s[i] = static_cast<double>(sum_units[i]) * chain.step;
        }
    }
    const double sigma = std::sqrt(sigma2);
    if (options.identity) {
        path.z = path.x;
    } else {
        Stream first(seed, {tag::first_gaussian, n, replicate});
        path.z[1] = sigma * inverse_normal_cdf(first.uniform());
    }

    for (int level = 0; level <= schedule.top_level; ++level) {
        const int m = schedule.m[static_cast<std::size_t>(level)];
        const std::size_t base = std::size_t{1} << level;
        const std::size_t len = std::size_t{1} << m;
        const std::size_t blocks = base / len;
        for (std::size_t k = 1; k <= blocks; ++k) {
            const std::size_t a = base + (k - 1) * len;
            const double u = static_cast<double>(sum_units[a + len] - sum_units[a]) * chain.step;
            double v = u;
            if (!options.identity) {
                Stream stream(seed, {tag::block, n, replicate, static_cast<std::uint64_t>(level), k});
                const double delta = stream.uniform();
                v = conditional_quantile_gaussian(u, cache.get(state[a], m), sigma2, m, delta);
                const auto inc = skorohod_split(v, m, sigma2, stream);
                std::copy(inc.begin(), inc.end(), path.z.begin() + static_cast<std::ptrdiff_t>(a + 1));
            }
            if (options.record_blocks) path.blocks.push_back({level, k, m, state[a], path.s[a], u, v});
        }
    }
    for (std::size_t i = 1; i <= n; ++i) path.t[i] = path.t[i - 1] + path.z[i];

    path.first_error = std::abs(path.x[1] - path.z[1]);
    for (int level = 0; level <= schedule.top_level; ++level) {
        const int m = schedule.m[static_cast<std::size_t>(level)];
        const std::size_t base = std::size_t{1} << level;
        const std::size_t len = std::size_t{1} << m;
        LevelStats st{level, m, 0.0, 0.0, 0.0};
        double running = 0.0, block_running = 0.0, outer = 0.0;
        for (std::size_t i = base + 1; i <= 2 * base; ++i) {
            const double diff = path.x[i] - path.z[i];
            running += diff;
            st.d = std::max(st.d, std::abs(running));
            if ((i - base - 1) % len == 0) block_running = 0.0;
            block_running += diff;
            st.d2 = std::max(st.d2, std::abs(block_running));
            if ((i - base) % len == 0) {
                outer += (path.s[i] - path.s[i - len]) - (path.t[i] - path.t[i - len]);
                st.d1 = std::max(st.d1, std::abs(outer));
            }
        }
        path.levels.push_back(st);
    }
    return path;
}

struct CouplingErrors {
    double sup_error = 0.0;
    std::vector<LevelStats> per_level;
    /// D_L <= D_{L,1} + D_{L,2} at every level, up to rounding.
    bool level_decomposition_holds = true;
    /// sup |S - T| <= |X_1 - Z_1| + sum_L D_L, up to rounding.
    bool dyadic_decomposition_holds = true;
};

inline CouplingErrors coupling_errors(const CoupledPath& path) {
    CouplingErrors e;
    e.per_level = path.levels;
    for (std::size_t k = 1; k <= path.horizon; ++k) e.sup_error = std::max(e.sup_error, std::abs(path.s[k] - path.t[k]));
    double envelope = path.first_error;
    for (const auto& st : path.levels) {
        const double tol = 1e-9 * std::max(1.0, st.d1 + st.d2);
        if (st.d > st.d1 + st.d2 + tol) e.level_decomposition_holds = false;
        envelope += st.d;
    }
    if (e.sup_error > envelope + 1e-9 * std::max(1.0, envelope)) e.dyadic_decomposition_holds = false;
    return e;
}

}  // namespace wdlab
