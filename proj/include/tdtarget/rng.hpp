#pragma once

#include <cstdint>

namespace tdtarget {

// splitmix64-ctr, version 1.
//
// Output i of a stream with seed s is mix(s + (i + 1) * 0x9E3779B97F4A7C15),
// where mix is the SplitMix64 finalizer. A stream is therefore a pure
// function of (seed, counter) and can be reproduced or split anywhere.
// Doubles take the top 53 bits: u = (x >> 11) * 2^-53, in [0, 1).

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    static constexpr const char* kName = "splitmix64-ctr";
    static constexpr int kVersion = 1;

    constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

    constexpr std::uint64_t next_u64() noexcept {
        ++counter_;
        return splitmix_finalize(seed_ + counter_ * kGoldenGamma);
    }

    /// Uniform on [0, 1).
    constexpr double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_double();
    }

    /// Independent child stream; children of distinct indices do not overlap
    /// with each other or with the parent in practice.
    constexpr CounterRng split(std::uint64_t index) const noexcept {
        return CounterRng(splitmix_finalize(seed_ ^ splitmix_finalize(index + 0x632BE59BD9B4E019ULL)));
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace tdtarget
