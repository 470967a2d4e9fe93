#pragma once
/*
Pinned pseudo random number generation.

All randomness in the library flows through RandomStream, a xoshiro256**
generator (Blackman & Vigna, 2018) whose 256-bit state is filled from a
64-bit seed by four successive splitmix64 outputs. Doubles are drawn as
(next() >> 11) * 2^-53, i.e. uniform on [0, 1) with 53 random bits.

Per-run seeds in a batch are
    derive_seed(base, i) = splitmix64(base ^ (i * 0xD1B54A32D192ED03))
where splitmix64(x) is the standard splitmix64 output for state x:
    z  = x + 0x9E3779B97F4A7C15
    z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)
The multiplier is odd so i -> base ^ (i * M) is injective, and the splitmix
mix is a bijection on 64-bit words, so derive_seed is injective in i for a
fixed base. derive_seed(0, 0) = 0xE220A8397B1DCDAF.

Everything here is pure 64-bit unsigned arithmetic and therefore identical
on every platform.
*/

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace pgbandit {

inline constexpr std::string_view kRngAlgorithmId = "xoshiro256**/splitmix64-seeded";
inline constexpr std::uint64_t kSeedIndexMultiplier = 0xD1B54A32D192ED03ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run_index) noexcept {
    return splitmix64(base ^ (run_index * kSeedIndexMultiplier));
}

class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr RandomStream(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            word = splitmix64(x);
            x += 0x9E3779B97F4A7C15ULL;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return next(); }

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1).
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace pgbandit
