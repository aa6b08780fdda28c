#pragma once

// Portable deterministic PRNG. std::uniform_int_distribution is not
// reproducible across standard library implementations, so golden tests
// need a fixed stream: splitmix64 state advance with rejection-free
// bounded draws via 128-bit multiply (Lemire).

#include <cstdint>

namespace cpts {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        auto wide = static_cast<unsigned __int128>(next_u64()) * range;
        return lo + static_cast<int>(wide >> 64);
    }

  private:
    std::uint64_t state_;
};

// Deterministic per-item sub-seed so batches are order-independent.
inline std::uint64_t derive_subseed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (index + 1));
    return splitmix64(s);
}

}  // namespace cpts
