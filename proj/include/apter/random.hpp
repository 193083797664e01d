#pragma once

// Pinned random number generation. All randomness in the library flows
// through these helpers so that outputs are identical across platforms and
// standard libraries:
//   engine        boost::random::mt19937_64 (Boost >= 1.70)
//   distributions boost::random (normal: ziggurat, exponential: ziggurat)
//   stream seeds  SplitMix64 finalizer over (seed, stream index)
// Bump kRandomStreamVersion whenever any of the above changes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace apter {

inline constexpr int kRandomStreamVersion = 1;

using Engine = boost::random::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under master `seed`.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t index) { return Engine(stream_seed(seed, index)); }

/// Fisher-Yates shuffle with a portable index distribution.
template <typename T>
void shuffle(std::span<T> items, Engine& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::size_t j = pick(rng);
        std::swap(items[i - 1], items[j]);
    }
}

/// A uniformly random permutation of 0..n-1.
inline std::vector<std::size_t> permutation(std::size_t n, Engine& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(std::span<std::size_t>(p), rng);
    return p;
}

}  // namespace apter
