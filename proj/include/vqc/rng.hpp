#pragma once

#include <cmath>
#include <cstdint>

namespace vqc {

/// Counter-based deterministic RNG built on the splitmix64 mixer.
///
/// Every draw is a pure function of (key, counter), so independent streams
/// can be carved out of one seed (stream = key) and consumed in parallel
/// without coordination; results are identical for any thread count.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    /// Derive an independent stream for a sub-task.
    CounterRng stream(std::uint64_t tag) const {
        return CounterRng(mix(key_ ^ (0x9e3779b97f4a7c15ULL + tag)), 0);
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace vqc
