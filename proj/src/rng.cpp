#include "moderate/rng.hpp"

#include <cmath>
#include <numbers>

namespace moderate {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    constexpr std::uint64_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
    constexpr std::uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = M0 * c[0], p1 = M1 * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep) {
    std::uint64_t s = master;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (rep * 0xD1B54A32D192ED03ULL);
    return splitmix64(t);
}

std::array<std::uint32_t, 4> CounterRng::bits(Stream s, std::uint64_t index, std::uint64_t step, std::uint32_t block) const {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), static_cast<std::uint32_t>(step),
        (static_cast<std::uint32_t>(s) << 24) | (static_cast<std::uint32_t>(step >> 32) & 0xFF) << 16 | (block & 0xFFFF)};
    return philox4x32_10(ctr, {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::array<double, 2> CounterRng::uniforms(Stream s, std::uint64_t index, std::uint64_t step, std::uint32_t block) const {
    const auto r = bits(s, index, step, block);
    const std::uint64_t a = (std::uint64_t(r[0]) << 32 | r[1]) >> 11;
    const std::uint64_t b = (std::uint64_t(r[2]) << 32 | r[3]) >> 11;
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return {(double(a) + 0.5) * scale, (double(b) + 0.5) * scale};
}

void CounterRng::normals(Stream s, std::uint64_t index, std::uint64_t step, std::span<double> out) const {
    for (std::size_t j = 0; j < out.size(); j += 2) {
        const auto u = uniforms(s, index, step, static_cast<std::uint32_t>(j / 2));
        const double rad = std::sqrt(-2.0 * std::log(u[0]));
        const double th = 2.0 * std::numbers::pi * u[1];
        out[j] = rad * std::cos(th);
        if (j + 1 < out.size()) out[j + 1] = rad * std::sin(th);
    }
}

}  // namespace moderate
