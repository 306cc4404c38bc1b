#pragma once

// Standard normal distribution helpers.
//
// The quantile is Wichura's AS 241 (PPND16) rational approximation followed
// by one Halley step against erfc, which brings it to within a few ulp over
// the representable range. Callers that know the upper-tail mass 1 - t more
// accurately than t itself should use inverse_normal_cdf_upper.

#include <cmath>
#include <limits>
#include <numbers>

#include "wdlab/rng.hpp"

namespace wdlab {

inline double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// 1 - Phi(x), accurate in the upper tail.
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace detail {

// AS 241 on the lower tail; `lower` = min(t, 1 - t) supplied exactly by the caller.
inline double ppnd16(double t, double lower, bool upper_half) noexcept {
    const double q = t - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            ((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0;
        const double den =
            ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0;
        return q * num / den;
    }
    double r = std::sqrt(-std::log(lower));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
             4.63033784615654529590e+0) * r + 1.42343711074968357734e+0;
        const double den =
            ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
             2.05319162663775882187e+0) * r + 1.0;
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
             5.46378491116411436990e+0) * r + 6.65790464350110377720e+0;
        const double den =
            ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
             5.99832206555887937690e-1) * r + 1.0;
        x = num / den;
    }
    return upper_half ? x : -x;
}

// t and its complement c = 1 - t, at least one of them accurate.
inline double inverse_normal_cdf_impl(double t, double c) noexcept {
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    const bool upper_half = t > 0.5;
    double x = ppnd16(t, upper_half ? c : t, upper_half);
    if (!std::isfinite(x)) return x;
    // Halley polish, residual measured on the tail that is known accurately.
    const double err = upper_half ? (c - normal_sf(x)) : (normal_cdf(x) - t);
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    const double sign = upper_half ? -1.0 : 1.0;
    return x - sign * u / (1.0 + sign * x * u / 2.0);
}

}  // namespace detail

/// Phi^{-1}(t) for t in (0, 1); returns -inf / +inf at the endpoints.
inline double inverse_normal_cdf(double t) noexcept {
    return detail::inverse_normal_cdf_impl(t, 1.0 - t);
}

/// Phi^{-1}(1 - c), computed from the upper-tail mass c.
inline double inverse_normal_cdf_upper(double c) noexcept {
    return detail::inverse_normal_cdf_impl(1.0 - c, c);
}

/// Quantile given both t and 1 - t; picks whichever side is in the tail.
inline double inverse_normal_cdf(double t, double complement) noexcept {
    return detail::inverse_normal_cdf_impl(t, complement);
}

/// N(0, 1) draw by inversion, one uniform per draw.
inline double standard_normal(Stream& stream) noexcept { return inverse_normal_cdf(stream.uniform()); }

}  // namespace wdlab
