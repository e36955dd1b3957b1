#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "skewt/errors.hpp"

namespace skewt {

/// Summary statistics of an error population. std is the population
/// (1/n) standard deviation so that rmse^2 = mean^2 + std^2 holds exactly;
/// skewness is the moment estimator m3 / m2^{3/2}, defined as 0 for a
/// constant sequence.
struct ErrorStats {
    double rmse = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    std::size_t count = 0;
};

inline ErrorStats error_stats(std::span<const double> errors) {
    if (errors.empty()) throw ValidationError("error_stats: empty input");
    const double n = static_cast<double>(errors.size());
    double sum = 0.0, sumsq = 0.0;
    for (double e : errors) {
        sum += e;
        sumsq += e * e;
    }
    ErrorStats out;
    out.count = errors.size();
    out.mean = sum / n;
    out.rmse = std::sqrt(sumsq / n);
    double m2 = 0.0, m3 = 0.0;
    for (double e : errors) {
        const double d = e - out.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    out.std = std::sqrt(m2);
    out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return out;
}

/// 5/25/50/75/95% quantiles, linear interpolation between order statistics
/// (inclusive scheme).
struct QuantileSummary {
    double q05 = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    double q95 = 0.0;
};

inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ValidationError("quantile: empty input");
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline QuantileSummary quantile_summary(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    QuantileSummary out;
    out.q05 = quantile_sorted(values, 0.05);
    out.q25 = quantile_sorted(values, 0.25);
    out.q50 = quantile_sorted(values, 0.50);
    out.q75 = quantile_sorted(values, 0.75);
    out.q95 = quantile_sorted(values, 0.95);
    return out;
}

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

}  // namespace skewt
