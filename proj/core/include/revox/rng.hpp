#pragma once

#include <cstdint>
#include <initializer_list>

namespace revox {

// Stateless keyed generator: every variate is a hash of its full key, so
// results do not depend on the order in which walks are evaluated.

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t key_root(std::uint64_t seed) {
    return splitmix64(seed ^ 0x52564f58ULL);
}

/// Appends one key component. keyed_bits(s, {a, b, c}) equals
/// extend_key(extend_key(extend_key(key_root(s), a), b), c), so callers can
/// hoist a shared key prefix out of inner loops.
inline constexpr std::uint64_t extend_key(std::uint64_t h, std::uint64_t k) {
    return splitmix64(h ^ splitmix64(k));
}

inline constexpr std::uint64_t keyed_bits(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = key_root(seed);
    for (std::uint64_t k : key) {
        h = extend_key(h, k);
    }
    return h;
}

/// Element `counter` of the SplitMix64 sequence seeded with `key`; cheaper
/// than extend_key for the innermost counter of a key.
inline constexpr std::uint64_t stream_bits(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key + counter * 0x9e3779b97f4a7c15ULL);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double bits_to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double keyed_uniform(std::uint64_t seed,
                                      std::initializer_list<std::uint64_t> key) {
    return bits_to_unit(keyed_bits(seed, key));
}

/// Stream domains keep draws for different purposes independent.
enum class RngDomain : std::uint64_t {
    kWalk = 1,
    kMultiresWalk = 2,
    kResample = 3,
    kSynthetic = 4,
};

/// Sequential convenience wrapper over the keyed hash.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double uniform() { return keyed_uniform(seed_, {stream_, counter_++}); }
    std::uint64_t bits() { return keyed_bits(seed_, {stream_, counter_++}); }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace revox
