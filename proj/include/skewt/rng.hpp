#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace skewt {

/// Splittable counter-based random stream (SplitMix64 core).
///
/// Output i is a pure function of (key, i), so a stream can be copied
/// cheaply and substreams derived for parallel replications are
/// independent of execution order. Every stochastic routine in the
/// library takes an explicit stream; nothing draws from hidden state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ull)) {}

    /// Derive an independent child stream. Children of distinct indices,
    /// and children of distinct parents, do not collide in practice.
    RngStream substream(std::uint64_t index) const {
        return RngStream(mix64(key_ + 0x9e3779b97f4a7c15ull * (index + 1)) ^ index);
    }

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ull);
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1), safe as a log() argument.
    double uniform_open() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

    /// Standard normal via Box-Muller; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Gamma(shape, rate) by the Marsaglia-Tsang squeeze method.
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::domain_error("gamma sampler requires shape > 0 and rate > 0");
        if (shape < 1.0) {
            // boost: G(a) = G(a+1) * U^(1/a)
            const double boost = std::pow(uniform_open(), 1.0 / shape);
            return gamma(shape + 1.0, rate) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace skewt
