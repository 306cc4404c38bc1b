#pragma once

// Stationary bounded dependent sequences.
//
// FiniteChain is the exact-computation workhorse: a finite Markov chain with a
// centered observable whose values live on a lattice {integer * step}. The
// observable is read after each transition: X_i = f(Y_i) with Y_0 drawn from
// the stationary law, so X_1 is the first value of a path.
//
// LsvProcess iterates the intermittent map
//     T(x) = x (1 + (2x)^gamma)  on [0, 1/2),   T(x) = 2x - 1  on [1/2, 1]
// from a uniform start, discarding a burn-in to approximate the invariant law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "wdlab/error.hpp"
#include "wdlab/rng.hpp"

namespace wdlab {

struct FiniteChain {
    std::vector<std::string> labels;
    Eigen::MatrixXd transition;
    Eigen::VectorXd stationary;
    /// Observable in lattice units; value(s) = units[s] * step.
    std::vector<std::int64_t> units;
    double step = 1.0;
    double sup_norm = 0.0;
    /// Pathwise bound on |S_k| when one is known (coboundaries).
    std::optional<double> partial_sum_bound;
    std::string id = "chain";

    std::size_t size() const { return units.size(); }
    double value(std::size_t s) const { return static_cast<double>(units[s]) * step; }

    Eigen::VectorXd observable() const {
        Eigen::VectorXd f(static_cast<Eigen::Index>(size()));
        for (std::size_t s = 0; s < size(); ++s) f(static_cast<Eigen::Index>(s)) = value(s);
        return f;
    }
};

namespace detail {

inline constexpr double row_sum_tolerance = 1e-12;
inline constexpr double stationarity_tolerance = 1e-10;
inline constexpr double centering_tolerance = 1e-10;

inline void check_stochastic(const Eigen::MatrixXd& p) {
    if (p.rows() == 0 || p.rows() != p.cols()) throw LabError("transition matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (!(p(i, j) >= 0.0)) throw LabError("transition matrix has a negative or NaN entry");
            sum += p(i, j);
        }
        if (std::abs(sum - 1.0) > row_sum_tolerance)
            throw LabError("transition row " + std::to_string(i) + " does not sum to 1");
    }
}

/// Unique stationary law of a stochastic matrix, or LabError.
inline Eigen::VectorXd stationary_law(const Eigen::MatrixXd& p) {
    const Eigen::Index n = p.rows();
    const Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> rank_lu(a);
    rank_lu.setThreshold(1e-10);
    if (rank_lu.rank() < n - 1) throw LabError("non-unique stationary law");
    Eigen::MatrixXd system = a;
    system.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (pi(i) < -1e-12) throw LabError("non-unique stationary law");
        pi(i) = std::max(pi(i), 0.0);
    }
    pi /= pi.sum();
    if ((pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff() > stationarity_tolerance)
        throw LabError("stationary vector failed the fixed-point check");
    return pi;
}

/// Continued-fraction approximation num/den of x with den <= max_den.
inline std::optional<std::pair<std::int64_t, std::int64_t>> rational_approximation(double x, std::int64_t max_den,
                                                                                   double tolerance) {
    const double sign = x < 0 ? -1.0 : 1.0;
    double r = std::abs(x);
    std::int64_t h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_real = std::floor(r);
        if (a_real > 1e15) break;
        const auto a = static_cast<std::int64_t>(a_real);
        const std::int64_t h = a * h_prev + h_prev2;
        const std::int64_t k = a * k_prev + k_prev2;
        if (k > max_den) break;
        if (std::abs(std::abs(x) - static_cast<double>(h) / static_cast<double>(k)) <= tolerance)
            return std::pair{static_cast<std::int64_t>(sign) * h, k};
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
        const double frac = r - a_real;
        if (frac <= 0.0) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

inline std::int64_t lattice_units(double value, double step) {
    const double ratio = value / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw LabError("observable value " + std::to_string(value) + " is not on the lattice of step " +
                       std::to_string(step));
    return static_cast<std::int64_t>(rounded);
}

inline double compute_sup_norm(const std::vector<std::int64_t>& units, double step) {
    std::int64_t m = 0;
    for (auto u : units) m = std::max<std::int64_t>(m, u < 0 ? -u : u);
    return static_cast<double>(m) * step;
}

}  // namespace detail

/// Build a finite chain from a row-stochastic matrix and a raw observable on
/// the lattice of the given step. The observable is recentered by its
/// stationary mean; the centered values are re-snapped to the finer lattice
/// step / den when the mean is num / den in lattice units.
inline FiniteChain build_finite_chain(const Eigen::MatrixXd& transition, const std::vector<double>& observable_raw,
                                      double step = 1.0, std::vector<std::string> labels = {}) {
    detail::check_stochastic(transition);
    if (static_cast<Eigen::Index>(observable_raw.size()) != transition.rows())
        throw LabError("observable size does not match the number of states");
    if (!(step > 0.0)) throw LabError("lattice step must be positive");
    if (labels.empty()) {
        for (std::size_t s = 0; s < observable_raw.size(); ++s) labels.push_back("s" + std::to_string(s));
    } else if (labels.size() != observable_raw.size()) {
        throw LabError("label count does not match the number of states");
    }

    FiniteChain chain;
    chain.labels = std::move(labels);
    chain.transition = transition;
    chain.stationary = detail::stationary_law(transition);

    std::vector<std::int64_t> raw_units;
    raw_units.reserve(observable_raw.size());
    for (double v : observable_raw) raw_units.push_back(detail::lattice_units(v, step));

    double mean_units = 0.0;
    for (std::size_t s = 0; s < raw_units.size(); ++s)
        mean_units += chain.stationary(static_cast<Eigen::Index>(s)) * static_cast<double>(raw_units[s]);
    const auto frac = detail::rational_approximation(mean_units, 1'000'000, 1e-11 * std::max(1.0, std::abs(mean_units)));
    if (!frac) throw LabError("stationary mean of the observable is not a small-denominator rational in lattice units");
    const auto [num, den] = *frac;

    chain.units.reserve(raw_units.size());
    for (auto u : raw_units) chain.units.push_back(u * den - num);
    chain.step = step / static_cast<double>(den);
    chain.sup_norm = detail::compute_sup_norm(chain.units, chain.step);

    double centered = 0.0;
    for (std::size_t s = 0; s < chain.size(); ++s) centered += chain.stationary(static_cast<Eigen::Index>(s)) * chain.value(s);
    if (std::abs(centered) > detail::centering_tolerance) throw LabError("observable could not be centered");
    return chain;
}

/// Symmetric two-state flip chain: switch state with probability a, observable (+1, -1).
inline FiniteChain make_flip_chain(double a) {
    if (!(a > 0.0 && a < 1.0)) throw LabError("flip probability must lie in (0, 1)");
    Eigen::MatrixXd p(2, 2);
    p << 1.0 - a, a, a, 1.0 - a;
    auto chain = build_finite_chain(p, {1.0, -1.0}, 1.0, {"+", "-"});
    chain.id = "flip(a=" + std::to_string(a) + ")";
    return chain;
}

/// Divide the observable by its sup norm (only the step changes).
inline FiniteChain normalize(FiniteChain chain) {
    if (chain.sup_norm == 0.0) throw LabError("cannot normalize an identically zero observable");
    const double scale = chain.sup_norm;
    chain.step /= scale;
    chain.sup_norm = 1.0;
    if (chain.partial_sum_bound) *chain.partial_sum_bound /= scale;
    chain.id += "/normalized";
    return chain;
}

/// Degenerate observable whose partial sums telescope.
///
/// The chain is lifted to its edge chain on pairs (previous, current) with
/// P(s,t) > 0, and the observable is g(previous) - g(current). Then
/// S_n = g(Y_0) - g(Y_n) pathwise, so sigma^2 = 0 and |S_n| <= max g - min g.
inline FiniteChain make_coboundary(const FiniteChain& chain, const std::vector<double>& g_values, double g_step = 1.0) {
    const auto n = chain.size();
    if (g_values.size() != n) throw LabError("g must have one value per state");
    std::vector<std::int64_t> g_units;
    for (double g : g_values) g_units.push_back(detail::lattice_units(g, g_step));

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t)
            if (chain.transition(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) > 0.0) edges.emplace_back(s, t);

    const auto m = static_cast<Eigen::Index>(edges.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> f;
    std::vector<std::string> labels;
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto [s, t] = edges[static_cast<std::size_t>(e)];
        for (Eigen::Index e2 = 0; e2 < m; ++e2) {
            const auto [s2, t2] = edges[static_cast<std::size_t>(e2)];
            if (s2 == t) p(e, e2) = chain.transition(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2));
        }
        f.push_back(static_cast<double>(g_units[s] - g_units[t]) * g_step);
        labels.push_back(chain.labels[s] + ">" + chain.labels[t]);
    }
    auto lifted = build_finite_chain(p, f, g_step, std::move(labels));
    const auto [lo, hi] = std::minmax_element(g_units.begin(), g_units.end());
    lifted.partial_sum_bound = static_cast<double>(*hi - *lo) * g_step;
    lifted.id = "coboundary(" + chain.id + ")";
    return lifted;
}

/// Product chain of two independent copies with observable X - X'.
inline FiniteChain symmetrize(const FiniteChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    FiniteChain out;
    out.transition = Eigen::MatrixXd(n * n, n * n);
    out.stationary = Eigen::VectorXd(n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const Eigen::Index row = a * n + b;
            out.stationary(row) = chain.stationary(a) * chain.stationary(b);
            for (Eigen::Index c = 0; c < n; ++c)
                for (Eigen::Index d = 0; d < n; ++d) out.transition(row, c * n + d) = chain.transition(a, c) * chain.transition(b, d);
            out.units.push_back(chain.units[static_cast<std::size_t>(a)] - chain.units[static_cast<std::size_t>(b)]);
            out.labels.push_back(chain.labels[static_cast<std::size_t>(a)] + "|" + chain.labels[static_cast<std::size_t>(b)]);
        }
    out.step = chain.step;
    out.sup_norm = detail::compute_sup_norm(out.units, out.step);
    out.id = "symmetrized(" + chain.id + ")";
    return out;
}

/// Intermittent renewal surrogate: two mirrored towers of the given height.
///
/// From height h a walker climbs to h + 1 with probability ((h+1)/(h+2))^(1/gamma)
/// and otherwise restarts at the base of a uniformly chosen tower, so excursion
/// lengths have tail (h+1)^(-1/gamma) up to the truncation height. The observable
/// is +1 on the first tower and -1 on the second, which reproduces the long
/// laminar phases of the intermittent map with correlations decaying like
/// k^(1 - 1/gamma) below the truncation height.
inline FiniteChain make_intermittent_surrogate(double gamma, std::size_t height) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw LabError("surrogate gamma must lie in (0, 1)");
    if (height < 2) throw LabError("surrogate height must be at least 2");
    const auto h = static_cast<Eigen::Index>(height);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * h, 2 * h);
    std::vector<double> f;
    std::vector<std::string> labels;
    for (Eigen::Index side = 0; side < 2; ++side) {
        for (Eigen::Index level = 0; level < h; ++level) {
            const Eigen::Index row = side * h + level;
            const double climb =
                level + 1 < h ? std::pow((level + 1.0) / (level + 2.0), 1.0 / gamma) : 0.0;
            if (level + 1 < h) p(row, row + 1) = climb;
            p(row, 0) += 0.5 * (1.0 - climb);
            p(row, h) += 0.5 * (1.0 - climb);
            f.push_back(side == 0 ? 1.0 : -1.0);
            labels.push_back((side == 0 ? "R" : "L") + std::to_string(level));
        }
    }
    auto chain = build_finite_chain(p, f, 1.0, std::move(labels));
    chain.id = "intermittent(gamma=" + std::to_string(gamma) + ",height=" + std::to_string(height) + ")";
    return chain;
}

/// Inverse-cdf sampler over the rows of a finite chain.
class ChainSampler {
public:
    explicit ChainSampler(const FiniteChain& chain) {
        const auto n = static_cast<Eigen::Index>(chain.size());
        rows_.resize(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            std::vector<double> weights(static_cast<std::size_t>(n));
            for (Eigen::Index j = 0; j < n; ++j) weights[static_cast<std::size_t>(j)] = chain.transition(i, j);
            rows_[static_cast<std::size_t>(i)] = cumulative(weights);
        }
        initial_ = cumulative(std::vector<double>(chain.stationary.data(), chain.stationary.data() + n));
    }

    std::size_t initial(Stream& stream) const { return pick(initial_, stream.uniform()); }
    std::size_t next(std::size_t state, Stream& stream) const { return pick(rows_[state], stream.uniform()); }

private:
    using Table = std::vector<std::pair<double, std::size_t>>;

    static Table cumulative(const std::vector<double>& weights) {
        Table table;
        double acc = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (weights[j] <= 0.0) continue;
            acc += weights[j];
            table.emplace_back(acc, j);
        }
        table.back().first = 2.0;  // absorbs rounding; uniforms are < 1
        return table;
    }

    static std::size_t pick(const Table& table, double u) {
        for (const auto& [threshold, state] : table)
            if (u < threshold) return state;
        return table.back().second;
    }

    std::vector<Table> rows_;
    Table initial_;
};

// ---------------------------------------------------------------------------
// LSV map

inline double lsv_map(double gamma, double x) noexcept {
    return x < 0.5 ? x * (1.0 + std::pow(2.0 * x, gamma)) : 2.0 * x - 1.0;
}

/// orbit[0] = x0, orbit[k+1] = T(orbit[k]); n + 1 points.
inline std::vector<double> lsv_iterate(double gamma, double x0, std::size_t n) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw LabError("LSV gamma must lie in (0, 1)");
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw LabError("LSV start point must lie in [0, 1]");
    std::vector<double> orbit(n + 1);
    orbit[0] = x0;
    for (std::size_t k = 0; k < n; ++k) orbit[k + 1] = lsv_map(gamma, orbit[k]);
    return orbit;
}

struct LsvProcess {
    double gamma = 0.5;
    std::function<double(double)> observable;
    std::string observable_name;
    /// Approximate invariant mean of the observable, subtracted from each value.
    double center = 0.0;
    double sup_norm = 1.0;
    std::size_t burn_in = 10'000;
    std::string id = "lsv";

    double value(double x) const { return observable(x) - center; }

    /// Uniform start followed by the burn-in.
    double initial_point(Stream& stream) const {
        double x = stream.uniform();
        for (std::size_t i = 0; i < burn_in; ++i) x = lsv_map(gamma, x);
        return x;
    }
};

/// Long-run orbit average of f, used as the centering constant.
inline double lsv_orbit_mean(double gamma, const std::function<double(double)>& f, std::size_t steps,
                             std::uint64_t seed, std::size_t burn_in = 10'000) {
    Stream stream(seed, {tag::reference});
    double x = stream.uniform();
    for (std::size_t i = 0; i < burn_in; ++i) x = lsv_map(gamma, x);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < steps; ++i) {
        x = lsv_map(gamma, x);
        sum += f(x);
    }
    return static_cast<double>(sum / static_cast<long double>(steps));
}

/// Named observables: "identity" (x) and "left_indicator" (1{x < 1/2}).
inline std::function<double(double)> lsv_observable(const std::string& name) {
    if (name == "identity") return [](double x) { return x; };
    if (name == "left_indicator") return [](double x) { return x < 0.5 ? 1.0 : 0.0; };
    throw LabError("unknown LSV observable '" + name + "'");
}

inline LsvProcess make_lsv_process(double gamma, const std::string& observable_name = "identity",
                                   std::size_t burn_in = 10'000, std::size_t reference_steps = 10'000'000,
                                   std::uint64_t reference_seed = 0x5eed) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw LabError("LSV gamma must lie in (0, 1)");
    LsvProcess process;
    process.gamma = gamma;
    process.observable_name = observable_name;
    process.observable = lsv_observable(observable_name);
    process.burn_in = burn_in;
    process.center = lsv_orbit_mean(gamma, process.observable, reference_steps, reference_seed, burn_in);
    // Both named observables take values in [0, 1].
    process.sup_norm = std::max(process.center, 1.0 - process.center);
    process.id = "lsv(gamma=" + std::to_string(gamma) + "," + observable_name + ")";
    return process;
}

/// Z_i = X_i - X'_i for two independent LSV orbits.
struct SymmetrizedLsv {
    LsvProcess base;
    double sup_norm() const { return 2.0 * base.sup_norm; }
};

inline SymmetrizedLsv symmetrize(const LsvProcess& process) { return SymmetrizedLsv{process}; }

using Process = std::variant<FiniteChain, LsvProcess, SymmetrizedLsv>;

inline Process symmetrize(const Process& process) {
    return std::visit([](const auto& p) -> Process { return symmetrize(p); }, process);
}

inline double sup_norm(const Process& process) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SymmetrizedLsv>) return p.sup_norm();
            else return p.sup_norm;
        },
        process);
}

inline std::string process_id(const Process& process) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SymmetrizedLsv>) return "symmetrized(" + p.base.id + ")";
            else return p.id;
        },
        process);
}

/// Streams values X_1, X_2, ... of a process for one replicate without
/// materializing the path. Construct one walker per replicate stream.
class Walker {
public:
    /// `shared` may point to a sampler built once for a finite chain and reused
    /// across replicates; otherwise the walker builds its own.
    Walker(const Process& process, std::uint64_t seed, std::initializer_list<std::uint64_t> stream_path,
           const ChainSampler* shared = nullptr)
        : process_(&process), stream_(derive_key(seed, stream_path)), copy_stream_(derive_key(stream_.key(), {tag::copy})) {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, FiniteChain>) {
                    if (shared == nullptr) {
                        owned_.emplace(p);
                        shared = &*owned_;
                    }
                    sampler_ = shared;
                    state_ = sampler_->initial(stream_);
                } else if constexpr (std::is_same_v<T, LsvProcess>) {
                    x_ = p.initial_point(stream_);
                } else {
                    x_ = p.base.initial_point(stream_);
                    x_copy_ = p.base.initial_point(copy_stream_);
                }
            },
            process);
    }

    /// Next value in observable units.
    double next() {
        if (const auto* chain = std::get_if<FiniteChain>(process_)) {
            state_ = sampler_->next(state_, stream_);
            return chain->value(state_);
        }
        if (const auto* lsv = std::get_if<LsvProcess>(process_)) {
            x_ = lsv_map(lsv->gamma, x_);
            return lsv->value(x_);
        }
        const auto& sym = std::get<SymmetrizedLsv>(*process_);
        x_ = lsv_map(sym.base.gamma, x_);
        x_copy_ = lsv_map(sym.base.gamma, x_copy_);
        return sym.base.value(x_) - sym.base.value(x_copy_);
    }

    /// Next lattice value (finite chains only).
    std::int64_t next_units() {
        const auto& chain = std::get<FiniteChain>(*process_);
        state_ = sampler_->next(state_, stream_);
        return chain.units[state_];
    }

    std::size_t state() const { return state_; }

private:
    const Process* process_;
    Stream stream_;
    Stream copy_stream_;
    std::optional<ChainSampler> owned_;
    const ChainSampler* sampler_ = nullptr;
    std::size_t state_ = 0;
    double x_ = 0.0;
    double x_copy_ = 0.0;
};

struct LatticeTrace {
    double step = 1.0;
    std::vector<std::int64_t> value_units;  // index 0 unused (X_0 is not part of a path)
    std::vector<std::int64_t> sum_units;
};

struct SamplePath {
    /// values[0] = 0 placeholder; values[k] = X_k for k = 1..n.
    std::vector<double> values;
    std::vector<double> partial_sums;
    /// max_{0<=j<=k} S_j (one-sided, includes S_0 = 0).
    std::vector<double> running_max;
    /// max_{1<=j<=k} |S_j|, with entry 0 equal to 0.
    std::vector<double> running_abs_max;
    std::uint64_t seed = 0;
    std::string process_id;
    std::optional<LatticeTrace> lattice;

    std::size_t length() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Deterministic path of length n; identical (process, n, seed) give identical paths.
inline SamplePath sample_path(const Process& process, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw LabError("sample_path: n must be at least 1");
    SamplePath path;
    path.seed = seed;
    path.process_id = process_id(process);
    path.values.assign(n + 1, 0.0);
    path.partial_sums.assign(n + 1, 0.0);
    path.running_max.assign(n + 1, 0.0);
    path.running_abs_max.assign(n + 1, 0.0);

    Walker walker(process, seed, {tag::path});
    if (const auto* chain = std::get_if<FiniteChain>(&process)) {
        LatticeTrace trace;
        trace.step = chain->step;
        trace.value_units.assign(n + 1, 0);
        trace.sum_units.assign(n + 1, 0);
        for (std::size_t k = 1; k <= n; ++k) {
            trace.value_units[k] = walker.next_units();
            trace.sum_units[k] = trace.sum_units[k - 1] + trace.value_units[k];
            path.values[k] = static_cast<double>(trace.value_units[k]) * trace.step;
            path.partial_sums[k] = static_cast<double>(trace.sum_units[k]) * trace.step;
        }
        path.lattice = std::move(trace);
    } else {
        for (std::size_t k = 1; k <= n; ++k) {
            path.values[k] = walker.next();
            path.partial_sums[k] = path.partial_sums[k - 1] + path.values[k];
        }
    }
    for (std::size_t k = 1; k <= n; ++k) {
        path.running_max[k] = std::max(path.running_max[k - 1], path.partial_sums[k]);
        path.running_abs_max[k] = std::max(path.running_abs_max[k - 1], std::abs(path.partial_sums[k]));
    }
    return path;
}

/// CSV with columns index,value,partial_sum.
inline void write_path_csv(const SamplePath& path, std::ostream& out) {
    out << "index,value,partial_sum\n";
    char buffer[96];
    for (std::size_t k = 1; k <= path.length(); ++k) {
        std::snprintf(buffer, sizeof buffer, "%zu,%.17g,%.17g\n", k, path.values[k], path.partial_sums[k]);
        out << buffer;
    }
}

}  // namespace wdlab
