#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace distanova {

// Counter-based 64-bit generator (SplitMix64). Every stream is a pure
// function of its seed, so independent streams can be derived by mixing
// (seed, index) pairs and results are identical for any thread schedule.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_open_double() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n) (Lemire multiply-shift with rejection).
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0ULL - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (uses two uniforms per call).
  double next_gaussian() {
    const double u = next_open_double();
    const double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
  }

 private:
  std::uint64_t state_;
};

// Mixes words into a stream seed; mix_seed(a, b, c) != mix_seed(a, c, b).
inline std::uint64_t mix_seed(std::uint64_t a) {
  SplitMix64 g(a);
  return g.next();
}
template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
  SplitMix64 g(a ^ 0x2545f4914f6cdd1dULL);
  return mix_seed(g.next() ^ b, rest...);
}

// Fisher-Yates: after the call, the first k entries are a uniformly random
// ordered k-subset of the span's elements. k == size gives a full shuffle.
template <typename T>
void partial_shuffle(std::span<T> items, std::size_t k, SplitMix64& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace distanova
