#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hoig {

/// mt19937_64 with hand-rolled variate generation. The standard distribution
/// adaptors are not bit-stable across standard libraries, and seeded results
/// here must be exactly reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
    std::mt19937_64 gen_;
};

/// splitmix64 mix; derives independent stream seeds from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hoig
