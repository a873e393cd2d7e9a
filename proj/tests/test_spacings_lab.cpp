#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "kspacings/errors.hpp"
#include "kspacings/random_stream.hpp"
#include "kspacings/spacings_lab.hpp"

using namespace kspacings;

TEST_SUITE("spacings_lab") {
  TEST_CASE("constant injection") {
    const std::vector<double> ones(12, 1.0);
    const SpacingsSample s = spacings_from_exponentials(3, 4, ones);
    CHECK(s.n == 11);
    CHECK(s.s_total == 12.0);
    CHECK(s.mu == 1.0);
    CHECK(normalizer(s) == 1.0);
    for (double y : s.y) CHECK(y == 3.0);
    for (double d : s.d) CHECK(d == 0.25);

    const std::vector<double> twos(12, 2.0);
    CHECK(normalizer(spacings_from_exponentials(3, 4, twos)) == 2.0);
  }

  TEST_CASE("constant injection uniformizes to a single value") {
    const std::vector<double> ones(2, 1.0);
    const UniformizedSample u = uniformize(spacings_from_exponentials(1, 2, ones));
    REQUIRE(u.w.size() == 2);
    CHECK(u.w[0] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(u.w[1] == u.w[0]);
  }

  TEST_CASE("determinism") {
    const SpacingsSample a = sample_spacings(1, 2, 42);
    const SpacingsSample b = sample_spacings(1, 2, 42);
    CHECK(a.y == b.y);
    CHECK(a.d == b.d);
    CHECK(a.mu == b.mu);
    const SpacingsSample c = sample_spacings(1, 2, 42, 1);
    CHECK(a.y != c.y);
  }

  TEST_CASE("spacings sum to one and rescale to mean k") {
    const SpacingsSample s = sample_spacings(3, 1000, 7);
    CHECK(s.n == 2999);
    CHECK(std::accumulate(s.d.begin(), s.d.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    double mean = 0.0;
    for (double d : s.d) mean += 3000.0 * d;
    mean /= 1000.0;
    // Standard error of a mean of 1000 Gamma(3) draws is sqrt(3/1000).
    CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt(3.0 / 1000.0));
    CHECK(s.mu == doctest::Approx(s.s_total / 3000.0).epsilon(1e-15));
  }

  TEST_CASE("normalizer fluctuation matches the CLT scale") {
    const int seeds = 200;
    std::vector<double> mus;
    for (int seed = 0; seed < seeds; ++seed) mus.push_back(sample_spacings(2, 100000, seed).mu);
    const double mean = std::accumulate(mus.begin(), mus.end(), 0.0) / seeds;
    double ss = 0.0;
    for (double m : mus) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / (seeds - 1));
    const double expected = 1.0 / std::sqrt(200000.0);
    CHECK(std::abs(sd / expected - 1.0) <= 0.2);
  }

  TEST_CASE("uniformized points are sorted and inside (0,1)") {
    const UniformizedSample u = uniformize(sample_spacings(4, 5000, 3));
    CHECK(std::is_sorted(u.w.begin(), u.w.end()));
    CHECK(u.w.front() > 0.0);
    CHECK(u.w.back() < 1.0);
  }

  TEST_CASE("uniformized points pass a loose Kolmogorov-Smirnov check") {
    const int seeds = 500;
    const std::size_t n = 10000;
    const double critical = 1.95 / std::sqrt(static_cast<double>(n));
    int passed = 0;
    for (int seed = 0; seed < seeds; ++seed) {
      const UniformizedSample u = uniformize(sample_spacings(2, n, 11 + seed));
      double dist = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist = std::max(dist, std::abs(static_cast<double>(i + 1) / n - u.w[i]));
        dist = std::max(dist, std::abs(u.w[i] - static_cast<double>(i) / n));
      }
      if (dist < critical) ++passed;
    }
    CHECK(passed >= 0.99 * seeds);
  }

  TEST_CASE("substream keys do not collide") {
    std::set<std::uint64_t> keys;
    std::size_t total = 0;
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
      for (std::uint64_t n : {2ULL, 1000ULL, 100000ULL}) {
        for (std::uint64_t k : {1ULL, 2ULL, 3ULL}) {
          for (std::uint64_t r = 0; r < 200; ++r) {
            keys.insert(stream_key(seed, n, k, r));
            ++total;
          }
        }
      }
    }
    CHECK(keys.size() == total);
  }

  TEST_CASE("open uniform stream stays inside (0,1)") {
    CounterStream stream(stream_key(9, 9, 9, 9));
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = stream.next_open01();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(std::abs(sum / 100000.0 - 0.5) < 0.005);
    CHECK(stream.position() == 100000);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS((void)sample_spacings(0, 10, 1), DomainError);
    CHECK_THROWS_AS((void)sample_spacings(2, 1, 1), DomainError);
    CHECK_THROWS_AS((void)sample_spacings(2, 1000, 1, 0, 1000), ResourceError);
    const std::vector<double> short_input(3, 1.0);
    CHECK_THROWS_AS((void)spacings_from_exponentials(2, 2, short_input), DomainError);
    const std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS((void)spacings_from_exponentials(1, 2, bad), DomainError);
  }
}
