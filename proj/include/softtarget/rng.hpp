#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace softtarget {

/// Deterministic pseudo-random generator: xoshiro256** (Blackman & Vigna),
/// seeded through SplitMix64. The algorithm is pinned so that a given seed
/// produces the same bit stream on every platform and in every release;
/// dropout masks, weight init and shuffling all depend on that.
///
/// An Rng is single-owner: never share one instance between threads. To run
/// work in parallel, fork() child streams up front and hand one to each owner.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Next raw 64-bit output.
    std::uint64_t next_u64();

    /// Uniform integer in [0, bound). Unbiased via rejection sampling. bound > 0.
    std::uint64_t next_below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal deviate (Box-Muller; consumes two uniforms per call).
    double normal();

    /// Child generator with an independent stream, derived from this stream's
    /// next output. Advances this generator.
    Rng fork();

    /// Raw state, for checkpointing.
    std::array<std::uint64_t, 4> state() const noexcept { return s_; }
    static Rng from_state(const std::array<std::uint64_t, 4>& s) noexcept;

private:
    Rng() = default;
    std::array<std::uint64_t, 4> s_{};
};

/// Fisher-Yates permutation of {0, ..., n-1}, fully determined by the rng state.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace softtarget
