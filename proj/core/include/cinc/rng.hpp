#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace cinc {

/// FNV-1a over arbitrary bytes; used for keyed RNG streams and content fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return fnv1a64(&v, sizeof(v), h);
}

/// Deterministic random stream keyed by (seed, tag, index...).  The engine is
/// mt19937_64 (bit-stable across platforms); value mappings are done by hand
/// because the standard <random> distributions are implementation-defined.
class KeyedRng {
public:
    KeyedRng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
        std::uint64_t h = fnv1a64(tag);
        h = hash_combine(h, seed);
        h = hash_combine(h, index);
        engine_.seed(h);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// Fisher-Yates shuffle of [0, n) indices.
    template <typename Index>
    void shuffle(std::vector<Index>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace cinc
