#pragma once
// Counter-based random numbers.
//
// Each draw is splitmix64(key + counter * golden_gamma), where the key mixes
// the seed with a stream id. Outputs depend only on (seed, stream, counter),
// so sequences replay identically on every platform and compiler, unlike the
// distributions in <random>.

#include <cstdint>

namespace clipal {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += kGoldenGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ (stream * 0xD6E8FEB86659FD93ULL + 0x632BE59BD9B4E019ULL));
}

class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(derive_seed(seed, stream)) {}

    constexpr std::uint64_t next() noexcept { return splitmix64(key_ + (counter_++) * kGoldenGamma); }

    // Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection, free of modulo bias. n must be > 0.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace clipal
