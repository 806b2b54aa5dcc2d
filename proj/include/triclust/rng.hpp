#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace triclust {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive hash of a seed plus coordinates (grid cells, rng streams).
template <typename... Parts>
std::uint64_t seed_mix(std::uint64_t seed, Parts... parts) {
    std::uint64_t h = splitmix64(seed);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
}

// mt19937_64 engine with hand-rolled draw functions. The standard library
// distributions are implementation-defined, these are not, so runs seeded
// the same way reproduce bit-for-bit everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, 1) with 53 bits of mantissa
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // standard normal via Box-Muller (no cached spare)
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace triclust
