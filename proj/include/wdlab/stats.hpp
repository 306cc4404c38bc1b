#pragma once

// Small statistics toolbox: binomial confidence intervals, the one-sample
// Kolmogorov-Smirnov test and log-log rate regression.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "wdlab/error.hpp"

namespace wdlab {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
inline Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95) {
    if (trials == 0) throw LabError("clopper_pearson: zero trials");
    if (successes > trials) throw LabError("clopper_pearson: successes exceed trials");
    const double alpha = 1.0 - confidence;
    const double k = static_cast<double>(successes);
    const double n = static_cast<double>(trials);
    Interval ci;
    ci.low = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
    ci.high = successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return ci;
}

/// Survival function of the Kolmogorov limit law, P(K > lambda).
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-transformed series, fast for small lambda.
        const double a = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const double odd = 2.0 * j - 1.0;
            sum += std::exp(a * odd * odd);
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t samples = 0;
    bool passes(double level) const { return p_value > level; }
};

/// One-sample KS test of `samples` against a continuous cdf.
/// The p-value uses Stephens' finite-n correction of the Kolmogorov law.
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw LabError("ks_test: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double root = std::sqrt(n);
    KsResult out;
    out.statistic = d;
    out.samples = samples.size();
    out.p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
    return out;
}

struct RunningMoments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double standard_error() const {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

/// Result of regressing log(y) on log(n).
struct PowerFit {
    double exponent = 0.0;
    double intercept = 0.0;
    /// Standard error of the exponent. Propagated from per-point noise when
    /// point standard errors were supplied, residual-based otherwise.
    double exponent_se = 0.0;
    double residual_se = 0.0;
    std::optional<double> log_correction;
};

/// Fit y ~ C n^a (optionally times (log n)^b) by least squares in log space.
/// `log_se` holds the standard error of each log(y) point, if known.
inline PowerFit fit_power_law(std::span<const double> n, std::span<const double> y,
                              std::span<const double> log_se = {}, bool with_log_correction = false) {
    const std::size_t k = n.size();
    if (k != y.size() || k < 2) throw LabError("fit_power_law: need at least two matched points");
    const std::size_t cols = with_log_correction ? 3 : 2;
    if (k < cols) throw LabError("fit_power_law: too few points for the requested regressors");
    Eigen::MatrixXd design(k, cols);
    Eigen::VectorXd rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(n[i] > 1.0) || !(y[i] > 0.0)) throw LabError("fit_power_law: need n > 1 and y > 0");
        design(i, 0) = 1.0;
        design(i, 1) = std::log(n[i]);
        if (with_log_correction) design(i, 2) = std::log(std::log(n[i]));
        rhs(i) = std::log(y[i]);
    }
    const Eigen::MatrixXd normal = design.transpose() * design;
    const Eigen::MatrixXd inverse = normal.inverse();
    const Eigen::VectorXd beta = inverse * design.transpose() * rhs;
    const Eigen::VectorXd resid = rhs - design * beta;

    PowerFit fit;
    fit.intercept = beta(0);
    fit.exponent = beta(1);
    if (with_log_correction) fit.log_correction = beta(2);
    const double dof = static_cast<double>(k) - static_cast<double>(cols);
    fit.residual_se = dof > 0 ? std::sqrt(resid.squaredNorm() / dof) : 0.0;
    if (!log_se.empty()) {
        if (log_se.size() != k) throw LabError("fit_power_law: log_se size mismatch");
        // Var(beta) = (X'X)^-1 X' diag(se^2) X (X'X)^-1
        Eigen::MatrixXd weighted = design;
        for (std::size_t i = 0; i < k; ++i) weighted.row(i) *= log_se[i] * log_se[i];
        const Eigen::MatrixXd cov = inverse * design.transpose() * weighted * inverse;
        fit.exponent_se = std::sqrt(std::max(0.0, cov(1, 1)));
    } else {
        fit.exponent_se = fit.residual_se * std::sqrt(inverse(1, 1));
    }
    return fit;
}

}  // namespace wdlab
