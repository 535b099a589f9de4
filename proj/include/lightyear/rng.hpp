#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <vector>

namespace lightyear {

// Deterministic splitmix64 stream. Distributions are implemented here rather
// than taken from <random> because the standard leaves their algorithms
// unspecified and experiment outputs must be byte-stable across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller. No cached spare: one draw consumes two
    // uniforms, so call sequences stay trivially reproducible.
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Derives an independent sub-seed from (master_seed, purpose, client, round).
// Adding or removing one consumer never perturbs another consumer's stream,
// which is what makes paired-seed sweep comparisons meaningful.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view purpose,
                                 std::uint64_t client_id = 0, std::uint64_t round = 0) {
    std::uint64_t h = detail::mix64(master_seed ^ 0xA0761D6478BD642FULL);
    h = detail::mix64(h ^ detail::fnv1a64(purpose));
    h = detail::mix64(h ^ (client_id + 0x8EBC6AF09C88C6E3ULL));
    h = detail::mix64(h ^ (round + 0x589965CC75374CC3ULL));
    return h;
}

inline Rng derive_stream(std::uint64_t master_seed, std::string_view purpose,
                         std::uint64_t client_id = 0, std::uint64_t round = 0) {
    return Rng(derive_seed(master_seed, purpose, client_id, round));
}

}  // namespace lightyear
