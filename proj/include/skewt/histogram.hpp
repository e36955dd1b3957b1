#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skewt/errors.hpp"
#include "skewt/rng.hpp"

namespace skewt {

/// Piecewise-constant distribution given by bins [left, right) with
/// nonnegative masses. Sampling picks a bin by mass, then a uniform point
/// inside it; zero-width bins act as point masses.
class HistogramDistribution {
public:
    struct Bin {
        double left;
        double right;
        double count;
    };

    explicit HistogramDistribution(std::vector<Bin> bins) : bins_(std::move(bins)) {
        if (bins_.empty()) throw ValidationError("histogram: no bins");
        double total = 0.0;
        for (const auto& b : bins_) {
            if (!std::isfinite(b.left) || !std::isfinite(b.right) || !std::isfinite(b.count))
                throw ValidationError("histogram: bins must be finite");
            if (b.right < b.left) throw ValidationError("histogram: bin right edge below left edge");
            if (b.count < 0.0) throw ValidationError("histogram: negative bin count");
            total += b.count;
        }
        if (!(total > 0.0)) throw ValidationError("histogram: total mass must be positive");
        cumulative_.reserve(bins_.size());
        double acc = 0.0;
        for (const auto& b : bins_) {
            acc += b.count;
            cumulative_.push_back(acc);
        }
        total_ = acc;
    }

    double sample(RngStream& rng) const {
        const double target = rng.uniform() * total_;
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] <= target)
                lo = mid + 1;
            else
                hi = mid;
        }
        const Bin& b = bins_[lo];
        return b.left + rng.uniform() * (b.right - b.left);
    }

    double mean() const {
        double acc = 0.0;
        for (const auto& b : bins_) acc += b.count * 0.5 * (b.left + b.right);
        return acc / total_;
    }

    double variance() const {
        const double m = mean();
        double acc = 0.0;
        for (const auto& b : bins_) {
            const double mid = 0.5 * (b.left + b.right);
            const double w = b.right - b.left;
            acc += b.count * (w * w / 12.0 + (mid - m) * (mid - m));
        }
        return acc / total_;
    }

    const std::vector<Bin>& bins() const { return bins_; }

private:
    std::vector<Bin> bins_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

/// CSV rows of `bin_left,bin_right,count`; a header row is tolerated.
inline HistogramDistribution load_histogram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("histogram: cannot open " + path);
    std::vector<HistogramDistribution::Bin> bins;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw ValidationError("histogram: malformed row '" + line + "' in " + path);
        try {
            bins.push_back({std::stod(a), std::stod(b), std::stod(c)});
        } catch (const std::exception&) {
            if (bins.empty()) continue;  // header row
            throw ValidationError("histogram: non-numeric row '" + line + "' in " + path);
        }
    }
    return HistogramDistribution(std::move(bins));
}

/// Equal-width histogram of a sample, for building empirical noise models.
inline HistogramDistribution histogram_from_samples(const std::vector<double>& samples,
                                                    int bin_count) {
    if (samples.empty()) throw ValidationError("histogram: no samples");
    if (bin_count < 1) throw ValidationError("histogram: bin_count must be >= 1");
    double lo = samples[0], hi = samples[0];
    for (double s : samples) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi == lo) hi = lo + 1e-12;
    const double width = (hi - lo) / bin_count;
    std::vector<HistogramDistribution::Bin> bins(static_cast<std::size_t>(bin_count));
    for (int j = 0; j < bin_count; ++j)
        bins[static_cast<std::size_t>(j)] = {lo + j * width, lo + (j + 1) * width, 0.0};
    for (double s : samples) {
        auto idx = static_cast<std::size_t>((s - lo) / width);
        if (idx >= bins.size()) idx = bins.size() - 1;
        bins[idx].count += 1.0;
    }
    return HistogramDistribution(std::move(bins));
}

inline void save_histogram_csv(const HistogramDistribution& hist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("histogram: cannot write " + path);
    out << "bin_left,bin_right,count\n";
    char buf[128];
    for (const auto& b : hist.bins()) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", b.left, b.right, b.count);
        out << buf;
    }
}

}  // namespace skewt
