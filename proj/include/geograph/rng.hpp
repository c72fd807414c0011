#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace geograph {

/// Counter-based 64-bit generator.
///
/// Output number `i` of a stream is `splitmix64(key + (i + 1) * 0x9E3779B97F4A7C15)`, where the key is
/// derived from (seed, stream). Outputs depend only on (seed, stream, i), so every experiment component
/// can own an independent stream and replay exactly on any platform. Distributions are implemented here
/// rather than through <random> because the standard distributions are implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  /// Uniform integer in [0, n) without modulo bias. n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Stream identifiers used across the library so that components never share a stream.
namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kGenerator = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kDropout = 4;
inline constexpr std::uint64_t kSparsify = 5;
inline constexpr std::uint64_t kTsne = 6;
inline constexpr std::uint64_t kTest = 99;
}  // namespace streams

}  // namespace geograph
