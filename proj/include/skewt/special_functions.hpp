#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Scalar special functions used by the distribution layer. All routines are
// plain functions of their arguments and are safe to call concurrently.

namespace skewt::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

namespace detail {

/// Continued-fraction tail of erfcx for x >= 2.5 (Laplace's fraction,
/// modified Lentz evaluation).
inline double erfcx_cf(double x) {
    const double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 300; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        d = 1.0 / d;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / (std::sqrt(kPi) * f);
}

}  // namespace detail

/// Scaled complementary error function exp(x^2) erfc(x).
/// Stays representable for large positive x where erfc underflows.
inline double erfcx(double x) {
    if (x >= 2.5) return detail::erfcx_cf(x);
    if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
    // erfc(x) = 2 - erfc(-x); overflows to +inf below x ~ -26.6
    const double e = std::exp(x * x);
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    return 2.0 * e - erfcx(-x);
}

namespace detail {

inline double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("inc_beta requires a > 0 and b > 0");
    if (std::isnan(x)) throw std::domain_error("inc_beta: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lfront);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Regularized lower incomplete gamma function P(a, x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("gamma_p requires a > 0");
    if (std::isnan(x)) throw std::domain_error("gamma_p: x is NaN");
    if (x <= 0.0) return 0.0;
    const double lpre = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // series expansion
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::exp(lpre) * sum;
    }
    // continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(lpre) * h;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

/// lgamma(x + 1/2) - lgamma(x), stable for large x where the direct
/// difference loses digits to cancellation.
inline double lgamma_half_diff(double x) {
    if (x >= 3e4) {
        const double inv = 1.0 / x;
        return 0.5 * std::log(x) + std::log1p((-0.125 + 0.0078125 * inv) * inv);
    }
    return std::lgamma(x + 0.5) - std::lgamma(x);
}

/// E[Z] - alpha for a standard normal truncated to [alpha, inf), alpha >= 5.
/// Computed through the scaled complementary error function so the result
/// keeps full relative precision where the naive hazard-minus-alpha form
/// cancels catastrophically.
inline double normal_tail_mean_excess(double alpha) {
    const double mills = std::sqrt(kPi / 2.0) * erfcx(alpha / kSqrt2);
    return (1.0 - alpha * mills) / mills;
}

}  // namespace skewt::special
