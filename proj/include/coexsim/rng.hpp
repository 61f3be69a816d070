#pragma once

#include <cmath>
#include <cstdint>

namespace coexsim {

// Deterministic, platform-independent PRNG. Substreams are derived by
// hashing a seed with stream labels, so every sampling site gets its own
// stream regardless of evaluation order or thread count.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller (no libm distribution objects, so the
    // byte stream is identical on every platform).
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    uint64_t state_;
};

// Order-independent stream derivation: mix(seed, a, b, ...) is stable under
// re-evaluation and across threads.
inline uint64_t mix_seed(uint64_t seed, uint64_t a) {
    SplitMix64 s(seed ^ (a * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
    return s.next_u64();
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

} // namespace coexsim
