#pragma once

#include <cstdint>

namespace kspacings {

/// SplitMix64 output function.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of the substream used for one replicate. Distinct (seed, N, k,
/// replicate) tuples map to distinct keys with overwhelming probability.
[[nodiscard]] constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t n_spacings,
                                                 std::uint64_t k,
                                                 std::uint64_t replicate) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ULL);
  h = mix64(h ^ (n_spacings + 0xBB67AE8584CAA73BULL));
  h = mix64(h ^ (k + 0x3C6EF372FE94F82BULL));
  h = mix64(h ^ (replicate + 0xA54FF53A5F1D36F1ULL));
  return h;
}

/// Counter-based uniform stream: draw i is mix64(key + (i+1) * golden).
/// Any draw can be recomputed from (key, i) alone, so substreams never share
/// state and the period of each stream is 2^64.
class CounterStream {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

  [[nodiscard]] constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  [[nodiscard]] constexpr double next_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace kspacings
