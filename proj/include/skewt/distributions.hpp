#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skewt/rng.hpp"
#include "skewt/special_functions.hpp"

namespace skewt {

/// Parameters of one univariate skew-t component: location mu, squared
/// spread sigma2, shape delta (delta = 0 gives the symmetric Student t,
/// large |delta| one heavy skewed tail), degrees of freedom nu.
struct SkewTParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    double delta = 0.0;
    double nu = 4.0;

    void validate() const {
        if (!std::isfinite(mu)) throw std::domain_error("skew-t: mu must be finite");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
            throw std::domain_error("skew-t: sigma2 must be positive and finite");
        if (!std::isfinite(delta)) throw std::domain_error("skew-t: delta must be finite");
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw std::domain_error("skew-t: nu must be positive and finite");
    }
};

/// First two moments of a normal truncated to [0, inf).
struct TruncNormalMoments {
    double mean = 0.0;
    double second_moment = 0.0;
};

/// Student t density t(z; mu, sigma2, nu).
inline double student_t_pdf(double z, double mu, double sigma2, double nu) {
    if (!std::isfinite(z) || !std::isfinite(mu))
        throw std::domain_error("student_t_pdf: non-finite argument");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::domain_error("student_t_pdf: sigma2 must be positive and finite");
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw std::domain_error("student_t_pdf: nu must be positive and finite");
    const double r = z - mu;
    const double lognorm =
        special::lgamma_half_diff(0.5 * nu) - 0.5 * std::log(nu * special::kPi * sigma2);
    return std::exp(lognorm - 0.5 * (nu + 1.0) * std::log1p(r * r / (nu * sigma2)));
}

namespace detail {

/// Two-sided probability P(|T| <= t) for integer degrees of freedom,
/// evaluated by the classical finite trigonometric sums. Exact up to
/// rounding; every term is positive so nothing cancels.
inline double student_t_two_sided_int(double t, long f) {
    const double theta = std::atan(t / std::sqrt(static_cast<double>(f)));
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double c2 = c * c;
    if (f % 2 == 0) {
        double coef = 1.0;
        double power = 1.0;
        double sum = 1.0;
        for (long j = 1; j <= f / 2 - 1; ++j) {
            coef *= (2.0 * j - 1.0) / (2.0 * j);
            power *= c2;
            sum += coef * power;
        }
        return s * sum;
    }
    if (f == 1) return 2.0 * theta / special::kPi;
    double coef = 1.0;
    double power = c;
    double sum = c;
    for (long j = 1; j <= (f - 3) / 2; ++j) {
        coef *= (2.0 * j) / (2.0 * j + 1.0);
        power *= c2;
        sum += coef * power;
    }
    return (2.0 / special::kPi) * (theta + s * sum);
}

}  // namespace detail

/// CDF of Student's t with degrees of freedom nu, standard location/scale.
inline double student_t_cdf(double z, double nu) {
    if (!(nu > 0.0) || std::isnan(nu)) throw std::domain_error("student_t_cdf: nu must be > 0");
    if (std::isnan(z)) throw std::domain_error("student_t_cdf: z is NaN");
    if (z == 0.0) return 0.5;
    const double t = std::fabs(z);
    double two_sided;
    if (nu == std::floor(nu) && nu <= 1024.0) {
        two_sided = detail::student_t_two_sided_int(t, static_cast<long>(nu));
    } else if (nu > 1e8) {
        // normal limit; the O(1/nu) error is far below the tolerances used here
        two_sided = std::erf(t / special::kSqrt2);
    } else {
        two_sided = 1.0 - special::inc_beta(0.5 * nu, 0.5, nu / (nu + t * t));
    }
    return z > 0.0 ? 0.5 * (1.0 + two_sided) : 0.5 * (1.0 - two_sided);
}

/// Skew-t log-density evaluator with the nu- and scale-dependent
/// normalization precomputed. Construct once per component when the
/// density is evaluated many times (particle weighting).
class SkewTLogPdf {
public:
    explicit SkewTLogPdf(const SkewTParams& p) : p_(p) {
        p.validate();
        omega2_ = p.delta * p.delta + p.sigma2;
        lognorm_ = std::log(2.0) + special::lgamma_half_diff(0.5 * p.nu) -
                   0.5 * std::log(p.nu * special::kPi * omega2_);
        sigma_ = std::sqrt(p.sigma2);
    }

    double operator()(double z) const {
        const double r = z - p_.mu;
        if (!std::isfinite(r)) return -std::numeric_limits<double>::infinity();
        const double rr = r * r;
        const double logt = lognorm_ - 0.5 * (p_.nu + 1.0) * std::log1p(rr / (p_.nu * omega2_));
        if (p_.delta == 0.0) return logt + std::log(0.5);
        // rr overflow drives the skew argument to its +-delta/sigma sqrt(nu+1) limit
        const double zt = std::isfinite(rr)
                              ? (r * p_.delta / sigma_) *
                                    std::sqrt((p_.nu + 1.0) / (p_.nu * omega2_ + rr))
                              : (r > 0 ? 1.0 : -1.0) * p_.delta / sigma_ * std::sqrt(p_.nu + 1.0);
        return logt + std::log(student_t_cdf(zt, p_.nu + 1.0));
    }

private:
    SkewTParams p_;
    double omega2_;
    double lognorm_;
    double sigma_;
};

/// Skew-t density 2 t(z; mu, delta^2 + sigma2, nu) T(z~; 0, 1, nu + 1).
inline double skew_t_pdf(double z, const SkewTParams& p) {
    if (!std::isfinite(z)) throw std::domain_error("skew_t_pdf: non-finite argument");
    return std::exp(SkewTLogPdf(p)(z));
}

/// Exact mean and variance of the skew-t law. Requires nu > 2.
inline std::pair<double, double> skew_t_moments(const SkewTParams& p) {
    p.validate();
    if (!(p.nu > 2.0))
        throw std::domain_error("skew_t_moments: undefined for nu <= 2 (variance diverges)");
    // E[lambda^{-1/2}] under lambda ~ Gamma(nu/2, nu/2), times sqrt(2/pi)
    const double b = std::sqrt(p.nu / special::kPi) *
                     std::exp(-special::lgamma_half_diff(0.5 * (p.nu - 1.0)));
    const double mean_offset = p.delta * b;
    const double variance =
        (p.delta * p.delta + p.sigma2) * p.nu / (p.nu - 2.0) - mean_offset * mean_offset;
    return {p.mu + mean_offset, variance};
}

/// Moments of N(m, s2) truncated to [0, inf).
///
/// Uses the Mills-ratio form with a scaled-erfc evaluation; for deeply
/// truncated cases (m/s below -5) the hazard excess is computed through
/// erfcx so no catastrophic cancellation occurs.
inline TruncNormalMoments trunc_normal_moments(double m, double s2) {
    if (!(s2 > 0.0) || !std::isfinite(s2))
        throw std::domain_error("trunc_normal_moments: s2 must be positive and finite");
    if (!std::isfinite(m)) throw std::domain_error("trunc_normal_moments: m must be finite");
    const double s = std::sqrt(s2);
    const double alpha = -m / s;  // standardized truncation point
    double excess;                // E[Z | Z >= alpha] - alpha for standard normal Z
    if (alpha >= 5.0) {
        excess = special::normal_tail_mean_excess(alpha);
    } else if (0.5 * alpha * alpha < 700.0) {
        const double hazard =
            std::sqrt(2.0 / special::kPi) / special::erfcx(alpha / special::kSqrt2);
        excess = hazard - alpha;
    } else {
        // truncation point so deep in the lower tail that the hazard is 0
        excess = -alpha;
    }
    TruncNormalMoments out;
    out.mean = s * excess;
    double var_ratio = 1.0 - alpha * excess - excess * excess;
    if (!(var_ratio > 0.0)) var_ratio = std::numeric_limits<double>::min();
    if (var_ratio > 1.0) var_ratio = 1.0;
    out.second_moment = s2 * var_ratio + out.mean * out.mean;
    return out;
}

/// Inverse CDF of the chi-square distribution with dof degrees of freedom.
inline double chi2_quantile(double p, int dof) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p must lie in (0, 1)");
    if (dof < 1) throw std::domain_error("chi2_quantile: dof must be >= 1");
    const double a = 0.5 * dof;
    // bracket then bisect on the regularized incomplete gamma
    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * a);
    while (special::gamma_p(a, 0.5 * hi) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (special::gamma_p(a, 0.5 * mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

/// Draw n i.i.d. skew-t variates through the gamma / truncated-normal
/// hierarchy. Bit-reproducible for a given stream.
inline std::vector<double> sample_skew_t(const SkewTParams& p, std::size_t n, RngStream& rng) {
    p.validate();
    const double sigma = std::sqrt(p.sigma2);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = rng.gamma(0.5 * p.nu, 0.5 * p.nu);
        const double root = 1.0 / std::sqrt(lambda);
        const double u = std::fabs(rng.normal()) * root;  // N_+(0, 1/lambda)
        out.push_back(p.mu + p.delta * u + sigma * root * rng.normal());
    }
    return out;
}

/// Single skew-t draw; same hierarchy as sample_skew_t.
inline double sample_skew_t_one(const SkewTParams& p, RngStream& rng) {
    const double lambda = rng.gamma(0.5 * p.nu, 0.5 * p.nu);
    const double root = 1.0 / std::sqrt(lambda);
    const double u = std::fabs(rng.normal()) * root;
    return p.mu + p.delta * u + std::sqrt(p.sigma2) * root * rng.normal();
}

}  // namespace skewt
