#pragma once

#include <cstdint>

namespace lacunary {

// SplitMix64 (Steele, Lea, Flood 2014). All randomness in the library comes
// from this generator so outputs are bit-exact across platforms.
class SplitMix64 {
public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr std::uint64_t finalize(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t next() noexcept { return finalize(state_ += kGamma); }
    constexpr std::uint64_t operator()() noexcept { return next(); }

    // Top `bits` bits of the next output, bits in [1, 64].
    constexpr std::uint64_t next_bits(unsigned bits) noexcept { return next() >> (64 - bits); }

    // Uniform double in [0,1) with 53 random bits.
    constexpr double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

private:
    std::uint64_t state_;
};

// Stream key for (parent, index): used for per-coordinate seed rows and
// per-trial seeds so that streams never overlap by construction of the index.
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept
{
    return SplitMix64::finalize(parent ^ SplitMix64::finalize(index + SplitMix64::kGamma));
}

// Domain-separation tags.
inline constexpr std::uint64_t kSeedRowDomain = 0x5eed'0000'0000'0000ULL;
inline constexpr std::uint64_t kIidDomain = 0x11d0'0000'0000'0000ULL;

} // namespace lacunary
