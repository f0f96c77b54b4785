#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace bucket {

/// Deterministic random stream keyed by (seed, tag).
///
/// Only the engine (mt19937_64, fully specified by the standard) is taken from
/// <random>; the derived draws are implemented here so sequences are identical
/// across standard library implementations.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view tag);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01();
    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);
    /// Standard normal draw (Box-Muller).
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// Creates the stream for (seed, stream_tag).
inline RandomStream seeded_rng(std::uint64_t seed, std::string_view stream_tag) {
    return RandomStream(seed, stream_tag);
}

}  // namespace bucket
