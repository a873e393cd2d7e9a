#pragma once

// Simulation of non-overlapping k-spacings through the exponential
// representation D_i = Y_i / S_{n+1}, with Y_i the sum of the i-th block of k
// unit exponentials and n + 1 = Nk.

#include <cstdint>
#include <span>
#include <vector>

namespace kspacings {

inline constexpr std::uint64_t kDefaultSampleCap = 100'000'000;

struct SpacingsSample {
  std::uint32_t k = 0;
  std::uint64_t n_spacings = 0;  ///< N
  std::uint64_t n = 0;           ///< Nk - 1
  std::vector<double> y;         ///< block sums Y_i
  double s_total = 0.0;          ///< S_{n+1}, accumulated as the sum of the Y_i
  std::vector<double> d;         ///< spacings D_i = Y_i / S_{n+1}
  double mu = 0.0;               ///< S_{n+1} / (Nk)
  std::uint64_t seed = 0;
};

struct UniformizedSample {
  std::vector<double> w;  ///< sorted H_k(Nk D_i)
  std::uint32_t k = 0;
  std::uint64_t n_spacings = 0;
  std::uint64_t seed = 0;
};

/// Draws Nk unit exponentials E = -log(1 - u) from the substream
/// stream_key(seed, N, k, replicate) and builds the sample.
[[nodiscard]] SpacingsSample sample_spacings(std::int64_t k, std::int64_t n_spacings,
                                             std::uint64_t seed, std::uint64_t replicate = 0,
                                             std::uint64_t cap = kDefaultSampleCap);

/// Builds a sample from caller-supplied exponentials (exactly Nk positive values).
[[nodiscard]] SpacingsSample spacings_from_exponentials(std::int64_t k, std::int64_t n_spacings,
                                                        std::span<const double> exponentials,
                                                        std::uint64_t seed = 0);

[[nodiscard]] double normalizer(const SpacingsSample& sample);

/// W_i = H_k(Nk D_i), sorted ascending. The empirical path of W is the
/// reduced spacings process: #{W_i <= s} = #{Y_i <= mu H_k^{-1}(s)}.
[[nodiscard]] UniformizedSample uniformize(const SpacingsSample& sample);

}  // namespace kspacings
