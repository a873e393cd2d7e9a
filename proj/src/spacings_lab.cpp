#include "kspacings/spacings_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"
#include "kspacings/random_stream.hpp"

namespace kspacings {

namespace {

void check_shape(std::int64_t k, std::int64_t n_spacings) {
  if (k < 1) throw DomainError("spacings: k must be >= 1");
  if (k > static_cast<std::int64_t>(gamma::kMaxOrder)) {
    throw DomainError("spacings: k exceeds the supported gamma order");
  }
  if (n_spacings < 2) throw DomainError("spacings: N must be >= 2");
}

template <class NextExponential>
SpacingsSample build(std::uint32_t k, std::uint64_t n_spacings, std::uint64_t seed,
                     NextExponential&& next) {
  SpacingsSample s;
  s.k = k;
  s.n_spacings = n_spacings;
  s.n = n_spacings * k - 1;
  s.seed = seed;
  s.y.resize(n_spacings);
  double total = 0.0;
  for (std::uint64_t i = 0; i < n_spacings; ++i) {
    double block = 0.0;
    for (std::uint32_t j = 0; j < k; ++j) block += next();
    s.y[i] = block;
    total += block;
  }
  s.s_total = total;
  s.d.resize(n_spacings);
  for (std::uint64_t i = 0; i < n_spacings; ++i) s.d[i] = s.y[i] / total;
  s.mu = total / static_cast<double>(n_spacings * k);
  return s;
}

}  // namespace

SpacingsSample sample_spacings(std::int64_t k, std::int64_t n_spacings, std::uint64_t seed,
                               std::uint64_t replicate, std::uint64_t cap) {
  check_shape(k, n_spacings);
  const auto uk = static_cast<std::uint64_t>(k);
  const auto un = static_cast<std::uint64_t>(n_spacings);
  if (un > cap / uk) {
    std::ostringstream msg;
    msg << "sample_spacings: N*k = " << un << "*" << uk << " exceeds the cap " << cap;
    throw ResourceError(msg.str());
  }
  CounterStream stream(stream_key(seed, un, uk, replicate));
  return build(static_cast<std::uint32_t>(k), un, seed,
               [&stream] { return -std::log(1.0 - stream.next_open01()); });
}

SpacingsSample spacings_from_exponentials(std::int64_t k, std::int64_t n_spacings,
                                          std::span<const double> exponentials,
                                          std::uint64_t seed) {
  check_shape(k, n_spacings);
  const auto total = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n_spacings);
  if (exponentials.size() != total) {
    throw DomainError("spacings_from_exponentials: expected exactly N*k values");
  }
  for (double e : exponentials) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw DomainError("spacings_from_exponentials: exponentials must be positive and finite");
    }
  }
  std::size_t pos = 0;
  return build(static_cast<std::uint32_t>(k), static_cast<std::uint64_t>(n_spacings), seed,
               [&] { return exponentials[pos++]; });
}

double normalizer(const SpacingsSample& sample) { return sample.mu; }

UniformizedSample uniformize(const SpacingsSample& sample) {
  const gamma::Order order(sample.k);
  const double scale = static_cast<double>(sample.n_spacings * sample.k);
  UniformizedSample out;
  out.k = sample.k;
  out.n_spacings = sample.n_spacings;
  out.seed = sample.seed;
  out.w.reserve(sample.d.size());
  for (double di : sample.d) out.w.push_back(gamma::cdf(order, scale * di));
  std::sort(out.w.begin(), out.w.end());
  return out;
}

}  // namespace kspacings
