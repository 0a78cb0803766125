#pragma once

#include <cstdint>
#include <random>

#include "eja/element.hpp"

namespace eja {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; per-trial seeds are derive_seed(root, trial).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Eigen::VectorXd random_normal(Eigen::Index n, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

/// Element with i.i.d. standard normal coordinates.
inline Element random_element(const AlgebraSpec& spec, Rng& rng, double scale = 1.0) {
    return Element(spec, random_normal(spec.dim(), rng, scale));
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace eja
