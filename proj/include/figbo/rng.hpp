#ifndef FIGBO_RNG_HPP
#define FIGBO_RNG_HPP

#include <cstdint>
#include <random>

namespace figbo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) noexcept
{
    return splitmix64(splitmix64(base) ^ splitmix64(salt + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt, std::uint64_t index) noexcept
{
    return mix_seed(mix_seed(base, salt), index);
}

/// Named stream identifiers so each consumer of randomness owns its own sequence.
enum class Stream : std::uint64_t {
    Design = 1,
    Noise = 2,
    MonteCarlo = 3,
    AcqOptim = 4,
    Hyper = 5,
    Fallback = 6,
    Task = 7,
    Duplicate = 8,
};

inline std::uint64_t stream_seed(std::uint64_t run_seed, Stream s, std::uint64_t index = 0)
{
    return mix_seed(run_seed, static_cast<std::uint64_t>(s), index);
}

inline double uniform01(Rng& rng)
{
    // 53 random mantissa bits; identical across standard library implementations
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace figbo

#endif // FIGBO_RNG_HPP
