#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, stream, index, step, block), so results do not depend on how work
// is scheduled across threads.

#include <array>
#include <cstdint>
#include <span>

namespace moderate {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// One splitmix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of replication `rep` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep);

enum class Stream : std::uint32_t { Initial = 1, Noise = 2, Mixture = 3 };

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

    /// 128 random bits for (stream, index, step, block); step < 2^40, block < 2^16.
    std::array<std::uint32_t, 4> bits(Stream s, std::uint64_t index, std::uint64_t step, std::uint32_t block) const;

    /// Two uniforms in (0, 1).
    std::array<double, 2> uniforms(Stream s, std::uint64_t index, std::uint64_t step, std::uint32_t block) const;

    /// Fills out with standard normals (Box-Muller), two per block.
    void normals(Stream s, std::uint64_t index, std::uint64_t step, std::span<double> out) const;

private:
    std::uint64_t seed_;
};

}  // namespace moderate
