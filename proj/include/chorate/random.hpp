#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace chorate {

/// SplitMix64 output function; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines a master seed with up to three stream coordinates into a stream key.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) noexcept;

/// Maps 64 random bits to a double strictly inside (0, 1).
double to_open_unit(std::uint64_t bits) noexcept;

/// Counter-based uniform: the value depends only on (key, counter), so draws
/// can be generated in any order or on any thread.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept
{
    return to_open_unit(mix64(key ^ mix64(counter + 0x632be59bd9b4e019ULL)));
}

/// Sequential SplitMix64 generator for small serial tasks (samplers, shuffles).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    std::uint64_t next() noexcept;
    double uniform() noexcept { return to_open_unit(next()); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::uint64_t state_;
};

/// Latin-hypercube uniforms for `paths` sample paths: along every dimension the
/// paths occupy distinct strata [k/N, (k+1)/N), assigned by a per-dimension
/// permutation, with a counter-based jitter inside the stratum. Values are a pure
/// function of (key, dim, path), independent of evaluation order.
class StratifiedUniforms {
public:
    StratifiedUniforms(std::size_t paths, std::size_t dims, std::uint64_t key);

    double operator()(std::size_t dim, std::size_t path) const noexcept
    {
        const double stratum = static_cast<double>(strata_[dim * paths_ + path]);
        const double u = (stratum + counter_uniform(jitter_key_, dim * paths_ + path)) * inv_paths_;
        return u < 1.0 ? u : 0x1.fffffffffffffp-1;
    }
    std::size_t paths() const noexcept { return paths_; }
    std::size_t dims() const noexcept { return dims_; }

private:
    std::size_t paths_;
    std::size_t dims_;
    double inv_paths_;
    std::uint64_t jitter_key_;
    std::vector<std::uint32_t> strata_;
};

} // namespace chorate
