#pragma once

#include <cstdint>

namespace cutvem {

/// splitmix64 finalizer, used to decorrelate seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// xorshift64* generator. Streams for distinct (seed, index) pairs are
/// derived as splitmix64(seed ^ (index * odd constant)), so sequences do not
/// depend on evaluation order or thread scheduling.
class Xorshift64Star {
public:
    explicit constexpr Xorshift64Star(std::uint64_t seed) : state_(splitmix64(seed))
    {
        if (state_ == 0)
            state_ = 0x2545F4914F6CDD1DULL;
    }

    static constexpr Xorshift64Star stream(std::uint64_t seed, std::uint64_t index)
    {
        return Xorshift64Star(seed ^ (index * 0xD1B54A32D192ED03ULL));
    }

    constexpr std::uint64_t next()
    {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    constexpr double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

} // namespace cutvem
