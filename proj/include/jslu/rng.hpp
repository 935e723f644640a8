#ifndef JSLU_RNG_HPP
#define JSLU_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

// Sampling built directly on the mt19937 output stream. The standard
// pins that stream exactly, while std::uniform_*_distribution and
// std::shuffle are implementation-defined; routing every draw through
// these helpers keeps runs reproducible across toolchains.

namespace jslu {

// 27 random bits mapped into [0, 1).
inline double unit_uniform(std::mt19937& rng) {
    return double(rng() >> 5) * (1.0 / 134217728.0);
}

template <typename T>
T uniform(std::mt19937& rng, T lo, T hi) {
    return lo + (hi - lo) * T(unit_uniform(rng));
}

// Unbiased draw from [0, n) by rejection.
inline std::uint32_t bounded(std::mt19937& rng, std::uint32_t n) {
    std::uint32_t limit = std::uint32_t(-1) - std::uint32_t(-1) % n;
    std::uint32_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

// Fisher-Yates.
template <typename V>
void shuffle(V& v, std::mt19937& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = bounded(rng, std::uint32_t(i));
        std::swap(v[i - 1], v[j]);
    }
}

template <typename E>
const E& pick(const std::vector<E>& v, std::mt19937& rng) {
    return v[bounded(rng, std::uint32_t(v.size()))];
}

} // namespace jslu

#endif
