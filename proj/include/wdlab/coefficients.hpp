#pragma once

// Dependence coefficients of finite-state chains, computed exactly.
//
// For a stationary chain the past sigma-field F_0 collapses to the time-0
// state, so every conditional expectation below is a matrix-vector product
// and every L^1 norm is an average over the stationary law.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wdlab/error.hpp"
#include "wdlab/processes.hpp"

namespace wdlab {

// ---------------------------------------------------------------------------
// theta_{X,p,q}

namespace detail {

inline constexpr double tuple_budget = 1e7;

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// |Gamma_{p,q}|: a_1 >= 1, a_i >= 0, sum <= q.
inline double exponent_vector_count(int p, int q) {
    // Substitute b_1 = a_1 - 1: nonnegative p-vectors with sum <= q - 1.
    return binomial(q - 1 + p, p);
}

inline std::vector<Eigen::MatrixXd> matrix_powers(const Eigen::MatrixXd& p, int up_to) {
    std::vector<Eigen::MatrixXd> powers;
    powers.reserve(static_cast<std::size_t>(up_to) + 1);
    powers.push_back(Eigen::MatrixXd::Identity(p.rows(), p.cols()));
    for (int i = 1; i <= up_to; ++i) powers.push_back(p * powers.back());
    return powers;
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& p, std::int64_t k) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(p.rows(), p.cols());
    Eigen::MatrixXd base = p;
    while (k > 0) {
        if (k & 1) result = result * base;
        base = base * base;
        k >>= 1;
    }
    return result;
}

inline double stationary_l1_deviation(const Eigen::VectorXd& conditional, const Eigen::VectorXd& pi, double mean) {
    return (pi.array() * (conditional.array() - mean).abs()).sum();
}

}  // namespace detail

/// theta_{X,p,q}(k) of a finite chain.
///
/// The sup runs over exponent vectors in Gamma_{p,q} and index tuples
/// k <= k_1 < ... < k_p with span k_p - k_1 <= tuple_horizon. Shifting k_1
/// forward applies one more transition to the centered conditional
/// expectation, which cannot increase its L^1(pi) norm, so the sup over k_1
/// is attained at k_1 = k; only the span is truncated.
inline double theta_exact(const FiniteChain& chain, int p, int q, std::int64_t k, int tuple_horizon = 12) {
    if (p < 1 || q < 1) throw LabError("theta_exact: p and q must be positive");
    if (k < 0) throw LabError("theta_exact: k must be nonnegative");
    if (tuple_horizon < p - 1) throw LabError("theta_exact: tuple_horizon must be at least p - 1");
    const double count = detail::binomial(tuple_horizon, p - 1) * detail::exponent_vector_count(p, q);
    if (count > detail::tuple_budget)
        throw LabError("theta_exact: tuple budget exceeded (" + std::to_string(count) +
                       " evaluations); use a smaller tuple_horizon");

    const Eigen::VectorXd f = chain.observable();
    const Eigen::VectorXd& pi = chain.stationary;
    const auto powers = detail::matrix_powers(chain.transition, tuple_horizon);
    const Eigen::MatrixXd shift = detail::matrix_power(chain.transition, k);

    std::vector<Eigen::VectorXd> f_pow;
    for (int a = 0; a <= q; ++a) f_pow.push_back(f.array().pow(a).matrix());

    double best = 0.0;
    // Build h = D_{a_1} P^{g_2} D_{a_2} ... P^{g_p} D_{a_p} 1 from the last index backwards.
    std::function<void(int, int, int, const Eigen::VectorXd&)> descend =
        [&](int index, int exponent_left, int span_left, const Eigen::VectorXd& tail) {
            if (index == 0) {
                for (int a1 = 1; a1 <= exponent_left; ++a1) {
                    const Eigen::VectorXd h = f_pow[static_cast<std::size_t>(a1)].cwiseProduct(tail);
                    const double mean = pi.dot(h);
                    best = std::max(best, detail::stationary_l1_deviation(shift * h, pi, mean));
                }
                return;
            }
            // Point `index` (0-based) carries exponent a and sits `gap` steps after point index - 1.
            for (int a = 0; a <= exponent_left - 1; ++a) {
                const Eigen::VectorXd weighted = f_pow[static_cast<std::size_t>(a)].cwiseProduct(tail);
                for (int gap = 1; gap <= span_left - (index - 1); ++gap)
                    descend(index - 1, exponent_left - a, span_left - gap, powers[static_cast<std::size_t>(gap)] * weighted);
            }
        };
    descend(p - 1, q, tuple_horizon, Eigen::VectorXd::Ones(f.size()));
    return best;
}

/// E(X_{t_1}^{a_1} ... X_{t_r}^{a_r}) under the stationary law, times nondecreasing.
inline double stationary_moment(const FiniteChain& chain, const std::vector<std::int64_t>& times,
                                const std::vector<int>& powers) {
    if (times.size() != powers.size() || times.empty()) throw LabError("stationary_moment: need matched times and powers");
    const Eigen::VectorXd f = chain.observable();
    Eigen::VectorXd h = f.array().pow(powers.back()).matrix();
    for (std::size_t i = times.size() - 1; i-- > 0;) {
        const std::int64_t gap = times[i + 1] - times[i];
        if (gap < 0) throw LabError("stationary_moment: times must be nondecreasing");
        h = f.array().pow(powers[i]).matrix().cwiseProduct(detail::matrix_power(chain.transition, gap) * h);
    }
    return chain.stationary.dot(h);
}

// ---------------------------------------------------------------------------
// alpha_{infinity,4}

/// Strong-mixing coefficient between the time-0 state and four future
/// coordinates Y_k, Y_{k+g2}, ... with total gap span <= tuple_horizon.
///
/// alpha = sup_{A, B} |P(A and B) - P(A) P(B)| with A a set of time-0 states
/// and B a set of 4-tuples of future states. For fixed A the best B collects
/// the atoms with positive covariance contribution, so the inner sup is
/// linear in the atom count; A is enumerated in Gray-code order.
inline double alpha_inf4_exact(const FiniteChain& chain, std::int64_t k, int tuple_horizon = 12) {
    if (k < 1) throw LabError("alpha_inf4_exact: k must be at least 1");
    if (tuple_horizon < 3) throw LabError("alpha_inf4_exact: tuple_horizon must be at least 3");
    const auto n = static_cast<int>(chain.size());
    if (n > 8) throw LabError("alpha_inf4_exact: at most 8 states are supported");
    const double atoms = std::pow(static_cast<double>(n), 4);
    const double cost = detail::binomial(tuple_horizon, 3) * std::pow(2.0, n) * atoms;
    if (cost > 1e9) throw LabError("alpha_inf4_exact: event budget exceeded; use a smaller tuple_horizon");

    const auto powers = detail::matrix_powers(chain.transition, tuple_horizon);
    const Eigen::MatrixXd lead = detail::matrix_power(chain.transition, k);
    const Eigen::VectorXd& pi = chain.stationary;
    const auto atom_count = static_cast<std::size_t>(atoms);

    // joint[s][b] = P(Y_k = b1, ..., Y_{k+..} = b4 | Y_0 = s)
    std::vector<std::vector<double>> joint(static_cast<std::size_t>(n), std::vector<double>(atom_count));
    std::vector<double> marginal(atom_count);
    std::vector<double> cov(atom_count);
    double best = 0.0;

    for (int g2 = 1; g2 <= tuple_horizon - 2; ++g2)
        for (int g3 = 1; g2 + g3 <= tuple_horizon - 1; ++g3)
            for (int g4 = 1; g2 + g3 + g4 <= tuple_horizon; ++g4) {
                const auto& p2 = powers[static_cast<std::size_t>(g2)];
                const auto& p3 = powers[static_cast<std::size_t>(g3)];
                const auto& p4 = powers[static_cast<std::size_t>(g4)];
                std::fill(marginal.begin(), marginal.end(), 0.0);
                for (int s = 0; s < n; ++s) {
                    std::size_t idx = 0;
                    for (int b1 = 0; b1 < n; ++b1)
                        for (int b2 = 0; b2 < n; ++b2)
                            for (int b3 = 0; b3 < n; ++b3)
                                for (int b4 = 0; b4 < n; ++b4, ++idx) {
                                    const double pr = lead(s, b1) * p2(b1, b2) * p3(b2, b3) * p4(b3, b4);
                                    joint[static_cast<std::size_t>(s)][idx] = pr;
                                    marginal[idx] += pi(s) * pr;
                                }
                }
                // cov_b(A) = sum_{s in A} pi_s (joint_s(b) - marginal(b)); start from A = {}.
                std::fill(cov.begin(), cov.end(), 0.0);
                unsigned gray = 0;
                for (unsigned step = 1; step < (1u << n); ++step) {
                    const unsigned next = step ^ (step >> 1);
                    const int flip = std::countr_zero(gray ^ next);
                    const double sign = (next >> flip) & 1u ? 1.0 : -1.0;
                    const auto& js = joint[static_cast<std::size_t>(flip)];
                    const double w = sign * pi(flip);
                    double positive = 0.0;
                    for (std::size_t b = 0; b < atom_count; ++b) {
                        cov[b] += w * (js[b] - marginal[b]);
                        if (cov[b] > 0.0) positive += cov[b];
                    }
                    best = std::max(best, positive);
                    gray = next;
                }
            }
    return best;
}

// ---------------------------------------------------------------------------
// sigma^2

struct Sigma2 {
    double value = 0.0;
    /// Half-width of the certified interval around value.
    double radius = 0.0;
};

/// Modulus of the second-largest eigenvalue of the transition matrix.
inline double second_eigenvalue_modulus(const FiniteChain& chain) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(chain.transition, false);
    std::vector<double> moduli;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) moduli.push_back(std::abs(solver.eigenvalues()(i)));
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    return moduli.size() > 1 ? moduli[1] : 0.0;
}

/// sigma^2 = E X_0^2 + 2 sum_{k>=1} E X_0 X_k.
///
/// The value comes from the fundamental matrix (I - P + 1 pi')^{-1}; the
/// covariance series is summed independently until its terms fall below
/// double resolution, and the radius covers the disagreement plus a
/// spectral-gap bound on the neglected tail.
inline Sigma2 sigma2_exact(const FiniteChain& chain) {
    const double rho = second_eigenvalue_modulus(chain);
    if (rho > 1.0 - 1e-9) throw LabError("sigma2_exact: no spectral gap (periodic or reducible chain)");
    const auto n = static_cast<Eigen::Index>(chain.size());
    const Eigen::VectorXd f = chain.observable();
    const Eigen::VectorXd& pi = chain.stationary;
    const Eigen::MatrixXd fundamental =
        (Eigen::MatrixXd::Identity(n, n) - chain.transition + Eigen::VectorXd::Ones(n) * pi.transpose()).inverse();
    const Eigen::VectorXd zf = fundamental * f;
    const double solved = 2.0 * pi.dot(f.cwiseProduct(zf)) - pi.dot(f.cwiseProduct(f));

    const double scale = std::max(f.cwiseAbs().maxCoeff(), 1e-300);
    double series = pi.dot(f.cwiseProduct(f));
    Eigen::VectorXd v = f;
    // About 1e8 multiply-adds at most; whatever is left goes into the tail bound.
    const double size = static_cast<double>(n);
    const auto max_terms = static_cast<int>(std::clamp(1e8 / (size * size), 1e4, 1e7));
    double vmax = scale;
    for (int k = 1; k <= max_terms && vmax > 1e-18 * scale; ++k) {
        v = chain.transition * v;
        // Rounding leaves pi'f ~ 1e-17; P^k f would settle on that constant.
        v.array() -= pi.dot(v);
        series += 2.0 * pi.dot(f.cwiseProduct(v));
        vmax = v.cwiseAbs().maxCoeff();
    }
    const double tail = 2.0 * scale * vmax * rho / (1.0 - rho);
    return Sigma2{solved, std::abs(series - solved) + tail};
}

// ---------------------------------------------------------------------------
// Coefficient tables and their series

struct TailModel {
    enum class Kind { zero, geometric, polynomial };
    Kind kind = Kind::zero;
    /// Geometric: theta(k) = theta(K) * rate^(k - K) for k > K.
    double rate = 0.0;
    /// Polynomial: theta(k) = coefficient * k^(1 - exponent) for k > K.
    double coefficient = 0.0;
    double exponent = 0.0;

    static TailModel zero() { return {}; }
    static TailModel geometric(double rate) { return {Kind::geometric, rate, 0.0, 0.0}; }
    static TailModel polynomial(double coefficient, double exponent) {
        return {Kind::polynomial, 0.0, coefficient, exponent};
    }
};

struct ThetaTable {
    std::vector<double> values;
    TailModel tail;
    /// e.g. "theta_{4,4}" or "alpha_{inf,4}".
    std::string kind = "theta_{1,1}";
    int p = 1;
    int q = 1;
    /// Upper bound on values[0] implied by the sup norm, if known.
    double cap = std::numeric_limits<double>::infinity();
    /// Reported bound on the horizon truncation error, if any.
    double truncation_bound = 0.0;

    std::size_t horizon() const { return values.empty() ? 0 : values.size() - 1; }

    /// theta(k) for any k, using the tail model beyond the table.
    double at(std::int64_t k) const {
        const auto big_k = static_cast<std::int64_t>(horizon());
        if (k <= big_k) return values[static_cast<std::size_t>(k)];
        switch (tail.kind) {
            case TailModel::Kind::zero: return 0.0;
            case TailModel::Kind::geometric: return values.back() * std::pow(tail.rate, static_cast<double>(k - big_k));
            case TailModel::Kind::polynomial:
                return tail.coefficient * std::pow(static_cast<double>(k), 1.0 - tail.exponent);
        }
        return 0.0;
    }
};

inline void validate(const ThetaTable& table) {
    if (table.values.empty()) throw LabError("theta table is empty");
    for (std::size_t k = 0; k < table.values.size(); ++k) {
        if (!(table.values[k] >= 0.0)) throw LabError("theta table has a negative entry at k=" + std::to_string(k));
        if (k > 0 && table.values[k] > table.values[k - 1] + 1e-12)
            throw LabError("theta table is not nonincreasing at k=" + std::to_string(k));
    }
    if (table.values[0] > table.cap + 1e-12) throw LabError("theta(0) exceeds the sup-norm cap");
    const auto& tail = table.tail;
    if (tail.kind == TailModel::Kind::geometric && !(tail.rate >= 0.0 && tail.rate < 1.0))
        throw LabError("geometric tail rate must lie in [0, 1)");
    if (tail.kind == TailModel::Kind::polynomial) {
        if (!(tail.coefficient >= 0.0) || !(tail.exponent > 1.0)) throw LabError("invalid polynomial tail");
        const double big_k = static_cast<double>(table.horizon());
        const double last = table.values.back();
        if (big_k > 0 && last > 0.0) {
            const double declared = tail.coefficient * std::pow(big_k, 1.0 - tail.exponent);
            if (declared > 2.0 * last || declared < 0.5 * last)
                throw LabError("polynomial tail does not match theta(K) within a factor 2");
        }
    }
}

namespace detail {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// sum_{k >= first} k^{-s} for s > 1 (Euler-Maclaurin after 64 explicit terms).
inline double power_tail_sum(double s, std::int64_t first) {
    if (!(s > 1.0)) return infinity;
    first = std::max<std::int64_t>(first, 1);
    double sum = 0.0;
    for (std::int64_t k = first; k < first + 64; ++k) sum += std::pow(static_cast<double>(k), -s);
    const double a = static_cast<double>(first + 64);
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s) + s * std::pow(a, -s - 1.0) / 12.0 -
           s * (s + 1.0) * (s + 2.0) * std::pow(a, -s - 3.0) / 720.0;
    return sum;
}

/// sum_{k > m} k * theta(k) for a table, m >= K.
inline double first_moment_tail(const ThetaTable& t, std::int64_t m) {
    const auto big_k = static_cast<std::int64_t>(t.horizon());
    switch (t.tail.kind) {
        case TailModel::Kind::zero: return 0.0;
        case TailModel::Kind::geometric: {
            const double r = t.tail.rate;
            const double c = t.at(m);
            const double md = static_cast<double>(m);
            (void)big_k;
            return c * (md * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
        }
        case TailModel::Kind::polynomial:
            return t.tail.coefficient * power_tail_sum(t.tail.exponent - 2.0, m + 1);
    }
    return 0.0;
}

}  // namespace detail

/// Theta_1, Theta_2 and the weighted series of a coefficient table.
class SeriesSummary {
public:
    explicit SeriesSummary(ThetaTable table) : table_(std::move(table)) {
        validate(table_);
        const auto big_k = static_cast<std::int64_t>(table_.horizon());
        double s1 = 0.0, s2 = 0.0;
        for (std::int64_t k = 1; k <= big_k; ++k) {
            s1 += table_.values[static_cast<std::size_t>(k)];
            s2 += static_cast<double>(k) * table_.values[static_cast<std::size_t>(k)];
        }
        const auto& tail = table_.tail;
        switch (tail.kind) {
            case TailModel::Kind::zero: break;
            case TailModel::Kind::geometric: {
                const double c = table_.values.back();
                s1 += c * tail.rate / (1.0 - tail.rate);
                break;
            }
            case TailModel::Kind::polynomial:
                s1 += tail.coefficient * detail::power_tail_sum(tail.exponent - 1.0, big_k + 1);
                break;
        }
        s2 += detail::first_moment_tail(table_, big_k);
        theta1_ = 1.0 + s1;
        theta2_ = 1.0 + s2;
    }

    double theta1() const { return theta1_; }
    /// +infinity when the declared tail makes sum k theta(k) diverge.
    double theta2() const { return theta2_; }
    bool theta2_finite() const { return std::isfinite(theta2_); }
    const ThetaTable& table() const { return table_; }

    /// sum_{k>=1} k (k ^ x) theta(k), with k ^ x = min(k, x).
    double weighted(double x) const {
        if (!(x >= 0.0)) throw LabError("weighted: x must be nonnegative");
        const auto big_k = static_cast<std::int64_t>(table_.horizon());
        double sum = 0.0;
        for (std::int64_t k = 1; k <= big_k; ++k)
            sum += static_cast<double>(k) * std::min(static_cast<double>(k), x) * table_.values[static_cast<std::size_t>(k)];
        if (table_.tail.kind == TailModel::Kind::zero) return sum;
        if (!theta2_finite()) return detail::infinity;
        // k in (K, floor(x)] contributes k^2 theta(k); beyond that x k theta(k).
        const auto split = std::max<std::int64_t>(big_k, static_cast<std::int64_t>(std::floor(x)));
        for (std::int64_t k = big_k + 1; k <= split; ++k) {
            const double term = static_cast<double>(k) * static_cast<double>(k) * table_.at(k);
            sum += term;
            if (term < 1e-300) break;
        }
        return sum + x * detail::first_moment_tail(table_, split);
    }

    /// sigma^2 when the caller has it (the table alone does not determine it).
    std::optional<double> sigma2;

private:
    ThetaTable table_;
    double theta1_ = 1.0;
    double theta2_ = 1.0;
};

inline SeriesSummary series_summary(const ThetaTable& table) { return SeriesSummary(table); }

/// Build theta_{X,p,q}(0..K) for a chain, with a caller-declared tail.
inline ThetaTable theta_table(const FiniteChain& chain, int p, int q, std::size_t horizon_k, TailModel tail,
                              int tuple_horizon = 12) {
    ThetaTable table;
    table.p = p;
    table.q = q;
    table.kind = "theta_{" + std::to_string(p) + "," + std::to_string(q) + "}";
    table.tail = tail;
    table.cap = 2.0 * std::pow(std::max(1.0, chain.sup_norm), q);
    for (std::size_t k = 0; k <= horizon_k; ++k)
        table.values.push_back(theta_exact(chain, p, q, static_cast<std::int64_t>(k), tuple_horizon));
    table.truncation_bound = p * theta_exact(chain, 1, 1, tuple_horizon, 0);
    validate(table);
    return table;
}

/// Geometric tail anchored on the chain's spectral decay, never faster than
/// the last observed ratio of the table.
inline TailModel spectral_tail(const FiniteChain& chain, const std::vector<double>& values) {
    double rate = second_eigenvalue_modulus(chain);
    if (values.size() >= 2 && values[values.size() - 2] > 0.0)
        rate = std::max(rate, values.back() / values[values.size() - 2]);
    if (values.back() == 0.0) return TailModel::zero();
    return TailModel::geometric(std::min(rate, 1.0 - 1e-12));
}

struct SymmetrizationCheck {
    double theta_z = 0.0;
    double bound = 0.0;
    bool holds() const { return theta_z <= bound + 1e-12; }
};

/// theta_{Z,p,q}(k) on the exact product chain against 2^{q+1} theta_{X,p,q}(k).
inline SymmetrizationCheck symmetrization_check(const FiniteChain& chain, int p, int q, std::int64_t k,
                                                int tuple_horizon = 12) {
    const FiniteChain product = symmetrize(chain);
    SymmetrizationCheck out;
    out.theta_z = theta_exact(product, p, q, k, tuple_horizon);
    out.bound = std::pow(2.0, q + 1) * theta_exact(chain, p, q, k, tuple_horizon);
    return out;
}

/// q (2M)^q sum_{k>=0} (k+1)^{q-1} theta(k), +infinity if the series diverges.
inline double degenerate_moment_bound(double sup_bound, double q, const ThetaTable& table) {
    if (!(q >= 1.0)) throw LabError("degenerate_moment_bound: q must be at least 1");
    if (!(sup_bound >= 0.0)) throw LabError("degenerate_moment_bound: M must be nonnegative");
    validate(table);
    const auto big_k = static_cast<std::int64_t>(table.horizon());
    double sum = 0.0;
    for (std::int64_t k = 0; k <= big_k; ++k)
        sum += std::pow(static_cast<double>(k + 1), q - 1.0) * table.values[static_cast<std::size_t>(k)];
    const auto& tail = table.tail;
    if (tail.kind == TailModel::Kind::geometric) {
        double theta = table.values.back();
        for (std::int64_t k = big_k + 1; k < big_k + 100'000'000; ++k) {
            theta *= tail.rate;
            const double term = std::pow(static_cast<double>(k + 1), q - 1.0) * theta;
            sum += term;
            if (term <= 1e-18 * sum && static_cast<double>(k) * (1.0 - tail.rate) > q) break;
            if (theta == 0.0) break;
        }
    } else if (tail.kind == TailModel::Kind::polynomial) {
        const double s = tail.exponent - q;
        if (!(s > 1.0)) return detail::infinity;
        const std::int64_t explicit_end = big_k + 10'000;
        for (std::int64_t k = big_k + 1; k <= explicit_end; ++k)
            sum += std::pow(static_cast<double>(k + 1), q - 1.0) * tail.coefficient *
                   std::pow(static_cast<double>(k), 1.0 - tail.exponent);
        // (k+1)^{q-1} = k^{q-1} (1 + (q-1)/k + (q-1)(q-2)/(2k^2) + ...)
        const std::int64_t first = explicit_end + 1;
        sum += tail.coefficient * (detail::power_tail_sum(s, first) + (q - 1.0) * detail::power_tail_sum(s + 1.0, first) +
                                   0.5 * (q - 1.0) * (q - 2.0) * detail::power_tail_sum(s + 2.0, first));
    }
    return q * std::pow(2.0 * sup_bound, q) * sum;
}

}  // namespace wdlab
