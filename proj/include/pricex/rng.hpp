#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace pricex {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent trial seed from a base seed and a (point, replication)
// pair, so extending a sweep never perturbs the seeds of existing points.
inline std::uint64_t seed_for(std::uint64_t base, std::uint64_t point_index,
                              std::uint64_t replication_index) {
    std::uint64_t h = splitmix64(base ^ splitmix64(point_index + 1));
    return splitmix64(h ^ splitmix64(replication_index + 0x9e3779b97f4a7c15ULL));
}

// Seeded random stream. All draws go through explicit transforms of the raw
// 64-bit engine output, so sequences depend only on the seed, not on the
// standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // standard normal via the polar method; the second variate is discarded
    // so each call consumes a self-contained slice of the stream
    double normal() {
        double v1, v2, s;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        return v1 * std::sqrt(-2.0 * std::log(s) / s);
    }

    double normal(double mean, double sd) {
        return mean + sd * normal();
    }

    // Normal(mean, sd) conditioned on lo < x <= hi by rejection resampling.
    // Callers keep sd small relative to the window, so rejection is rare;
    // the attempt cap guards against misconfigured windows.
    double truncated_normal(double mean, double sd, double lo, double hi) {
        if (sd == 0.0) {
            if (mean <= lo || mean > hi)
                throw std::runtime_error("truncated_normal: degenerate mean outside window");
            return mean;
        }
        for (int attempt = 0; attempt < 100000; ++attempt) {
            double x = normal(mean, sd);
            if (x > lo && x <= hi) return x;
        }
        throw std::runtime_error("truncated_normal: rejection cap reached");
    }

    // Normal(mean, sd) conditioned on x >= 0 (lower truncation only)
    double truncated_normal_nonneg(double mean, double sd) {
        if (sd == 0.0) return mean < 0.0 ? 0.0 : mean;
        for (int attempt = 0; attempt < 100000; ++attempt) {
            double x = normal(mean, sd);
            if (x >= 0.0) return x;
        }
        throw std::runtime_error("truncated_normal_nonneg: rejection cap reached");
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace pricex
