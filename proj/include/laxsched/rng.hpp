#ifndef LAXSCHED_RNG_HPP
#define LAXSCHED_RNG_HPP

#include <cstdint>
#include <random>

namespace laxsched {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for stream `index` of `base`. Depends only on (base, index), so
/// replication r gets the same seed whatever the replication count is.
inline constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

/// Counter-based uniform in (0, 1): a pure function of (seed, stream, counter).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t h = splitmix64(split_seed(seed, stream) ^ splitmix64(counter));
    // 53 random bits, shifted off zero
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(split_seed(seed, stream));
}

}  // namespace laxsched

#endif
