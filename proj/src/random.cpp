#include "chorate/random.hpp"

#include <limits>
#include <stdexcept>

namespace chorate {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept
{
    std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ULL);
    key = mix64(key ^ (a + 0x9e3779b97f4a7c15ULL));
    key = mix64(key ^ (b + 0x3c6ef372fe94f82aULL));
    key = mix64(key ^ (c + 0xdaa66d2c7ddf743fULL));
    return key;
}

double to_open_unit(std::uint64_t bits) noexcept
{
    // 52 random bits centred in their cell: never exactly 0 or 1.
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t SplitMix64::next() noexcept
{
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept
{
    // Modulo with rejection of the biased low range.
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t r = next();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

StratifiedUniforms::StratifiedUniforms(std::size_t paths, std::size_t dims, std::uint64_t key)
    : paths_(paths), dims_(dims), inv_paths_(1.0 / static_cast<double>(paths)),
      jitter_key_(stream_key(key, 0x6a09e667ULL)), strata_(paths * dims)
{
    if (paths == 0 || paths > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("StratifiedUniforms: path count out of range");
    }
    for (std::size_t d = 0; d < dims; ++d) {
        std::uint32_t* perm = strata_.data() + d * paths;
        for (std::size_t i = 0; i < paths; ++i) {
            perm[i] = static_cast<std::uint32_t>(i);
        }
        SplitMix64 rng(stream_key(key, 0xbb67ae85ULL, d));
        for (std::size_t i = paths; i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(perm[i - 1], perm[j]);
        }
    }
}

} // namespace chorate
