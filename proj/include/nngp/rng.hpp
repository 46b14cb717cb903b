#pragma once

// Named, counter-addressed random substreams. Every random consumer derives its
// engine from (root seed, stream name, counter) so results do not depend on
// the order in which independent pieces of work are executed.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace nngp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256++; satisfies UniformRandomBitGenerator. State is expanded from a
/// single 64-bit seed with splitmix64, so it is never all zero.
class Engine {
public:
    using result_type = std::uint64_t;

    explicit Engine(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            w = splitmix64(x);
            x += 0x9e3779b97f4a7c15ULL;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t counter = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a(name)) + splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline Engine substream(std::uint64_t seed, std::string_view name, std::uint64_t counter = 0) {
    return Engine(substream_seed(seed, name, counter));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

/// Uniform on [-sqrt(3), sqrt(3)]: zero mean, unit variance.
inline double unit_uniform(Engine& eng) {
    constexpr double kSqrt3 = 1.7320508075688772;
    return kSqrt3 * (2.0 * uniform01(eng) - 1.0);
}

/// Fills out[0..n) with uniforms on [-sqrt(3), sqrt(3)] at 32-bit resolution,
/// two per engine call. Used for the bulk weight draws.
inline void fill_unit_uniform(Engine& eng, double* out, std::size_t n) {
    constexpr double kScale = 2.0 * 1.7320508075688772 * 0x1.0p-32;
    constexpr double kShift = -1.7320508075688772 + 0.5 * kScale;
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        const std::uint64_t r = eng();
        out[i] = kShift + kScale * static_cast<double>(static_cast<std::uint32_t>(r >> 32));
        out[i + 1] = kShift + kScale * static_cast<double>(static_cast<std::uint32_t>(r));
    }
    if (i < n) out[i] = kShift + kScale * static_cast<double>(static_cast<std::uint32_t>(eng() >> 32));
}

}  // namespace nngp
