#pragma once

#include <cmath>
#include <cstdint>

namespace maxperc {

// Counter-based generator: every variate is a pure function of
// (seed, stream, counter), so trial loops are reproducible regardless of
// thread scheduling and a single edge variate can be re-derived at will.
//
// splitmix64 finalizer; the per-draw state walks the usual golden-gamma
// sequence from a key mixed out of seed and stream.

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// Distinct purposes draw from disjoint streams even at equal indices.
enum class RngStream : std::uint64_t {
    BondState = 0x01,
    Noise = 0x02,
};

class CounterRng {
public:
    CounterRng(std::uint64_t seed, RngStream stream, std::uint64_t index)
        : key_(mix64(mix64(seed + kGoldenGamma) ^
                     (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ull +
                      index * 0x8cb92ba72f3d8dd7ull))) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key_ + counter * kGoldenGamma);
    }

    // Uniform on (0,1); 0 and 1 are unreachable.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
};

// Standard alpha-Frechet variate by inverse transform, U in (0,1).
inline double frechet_from_uniform(double u, double alpha) {
    return std::pow(-std::log(u), -1.0 / alpha);
}

// CDF of Frechet(alpha, scale) on x > 0.
inline double frechet_cdf(double x, double alpha, double scale) {
    return std::exp(-std::pow(scale / x, alpha));
}

}  // namespace maxperc
