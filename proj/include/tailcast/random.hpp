#pragma once

#include <cstdint>
#include <random>

namespace tailcast {

/// Every stochastic routine draws from a 64-bit Mersenne Twister. Its output
/// sequence is fixed by the C++ standard, so seeded runs are reproducible
/// across platforms. Distribution transforms come from Boost.Random (header
/// code, identical everywhere) rather than the implementation-defined
/// `<random>` distributions.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer applied to `seed + stream * golden`. Replicate `r` of
/// a batch seeded with `s` uses `make_rng(s, r)`; streams never share state.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

[[nodiscard]] Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform on the open interval (0, 1) with 53 random bits.
[[nodiscard]] double uniform_open(Rng& rng) noexcept;

[[nodiscard]] double standard_normal(Rng& rng);

[[nodiscard]] double beta_variate(Rng& rng, double a, double b);

}  // namespace tailcast
