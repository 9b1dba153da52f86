#pragma once

#include <cstdint>
#include <random>

#include "gibbs/rational.hpp"

namespace gibbs {

/// The generator used everywhere: 64-bit Mersenne Twister.
using Rng = std::mt19937_64;

inline constexpr const char* kRngName = "mt19937_64";

/// Independent stream for sample `index` of a run seeded with `seed`. Sample
/// i always sees the same stream, whatever the number of worker threads.
Rng stream_for(std::uint64_t seed, std::uint64_t index);

/// Uniform rational k / 2^bits in [0, 1).
Rational uniform_unit(Rng& rng, unsigned bits);

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

}  // namespace gibbs
