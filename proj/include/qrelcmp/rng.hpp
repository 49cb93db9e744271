#pragma once

// Counter-based seeding. Every random stream in the library is derived from a
// master seed plus a tuple of integer coordinates (iteration, topic,
// repetition, ...), so the values drawn never depend on execution order or on
// how work is split across threads.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>

namespace qrelcmp::rng {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

/// Seed for the stream at `coords` under `master`.
inline constexpr std::uint64_t derive_seed(
    std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64_mix(master ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : coords) {
    h = splitmix64_mix(h + 0x9e3779b97f4a7c15ULL + splitmix64_mix(c));
  }
  return h;
}

/// Uniform integer in [0, bound) with Lemire's multiply-and-reject method.
/// The result sequence is fully specified, unlike std::uniform_int_distribution.
template <class Gen>
std::uint64_t bounded(Gen& gen, std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(gen()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(gen()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Fisher-Yates shuffle with a fully specified draw sequence.
template <class T, class Gen>
void shuffle(std::span<T> items, Gen& gen) noexcept {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(gen, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Uniform real in [0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& gen) noexcept {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace qrelcmp::rng
