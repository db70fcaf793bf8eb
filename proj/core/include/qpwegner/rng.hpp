// Keyed counter-based random streams built on the splitmix64 mixer.
// Every random quantity in the library is a pure function of a seed and a
// few integer key words, so sampling is reproducible at any thread count
// and query order never matters.
#pragma once

#include <cstdint>
#include <initializer_list>

namespace qpwegner {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer (Steele, Lea, Flood; Vigna's fixed-increment variant).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Folds one key word into a hash state with full finalization per word.
inline constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t word) noexcept {
  state += kGoldenGamma;
  state ^= mix64(word + 0x2545f4914f6cdd1dull);
  return mix64(state);
}

inline constexpr std::uint64_t derive_key(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t s = mix64(seed + kGoldenGamma);
  for (std::uint64_t w : words) s = absorb(s, w);
  return s;
}

// Top 53 bits -> uniform double in [0, 1).
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double keyed_unit(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> words) noexcept {
  return to_unit(derive_key(seed, words));
}

// Sequential splitmix64 stream for per-sample draws; seed it with a
// derive_key so each sample index owns an independent stream.
class SplitStream {
 public:
  explicit constexpr SplitStream(std::uint64_t key) noexcept : state_(key) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  constexpr double next_unit() noexcept { return to_unit(next_u64()); }

 private:
  std::uint64_t state_;
};

}  // namespace qpwegner
