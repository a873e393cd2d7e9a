#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: plain long double series, bisection, and an exhaustive
// enumeration of window endpoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// H_k(x) as the series e^{-x} sum_{j >= k} x^j / j!, in long double.
inline double gamma_cdf_series(int k, double x) {
  if (x <= 0.0) return 0.0;
  const long double lx = x;
  long double term = std::exp(-lx);
  for (int j = 1; j <= k; ++j) term *= lx / j;  // e^{-x} x^k / k!
  long double sum = 0.0L;
  for (int j = k; j < k + 100000; ++j) {
    sum += term;
    term *= lx / (j + 1);
    if (term < sum * 1e-22L) break;
  }
  return static_cast<double>(sum);
}

/// 1 - H_k(x) as the finite sum e^{-x} sum_{j < k} x^j / j!.
inline double gamma_survival_sum(int k, double x) {
  const long double lx = x;
  long double term = std::exp(-lx);
  long double sum = 0.0L;
  for (int j = 0; j < k; ++j) {
    sum += term;
    term *= lx / (j + 1);
  }
  return static_cast<double>(sum);
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// sup over 0 <= s <= t <= 1, t - s <= a of |#{s < V <= t}/N - (t - s)|.
///
/// The objective is piecewise linear in (s, t), so the supremum sits at a
/// vertex of the arrangement formed by s, t in {0, 1, V_i} and t - s = a,
/// approached from either side of every jump. Each endpoint candidate is
/// tagged with whether the adjacent point counts (one-sided limit).
inline double modulus_by_vertices(std::vector<double> v, double a) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  struct End {
    double x;
    bool limit;  // s: approach from the left (includes V = x); t: from the left (excludes V = x)
    bool full_width = false;  // t = s + a; span taken as exactly a
  };
  std::vector<End> starts{{0.0, false}, {1.0 - a, false}};
  for (double p : v) {
    starts.push_back({p, false});
    if (p > 0.0) starts.push_back({p, true});
    if (p - a >= 0.0) starts.push_back({p - a, false});
  }
  auto count = [&](const End& s, const End& t) {
    double c = 0.0;
    for (double p : v) {
      const bool after_s = s.limit ? p >= s.x : p > s.x;
      const bool before_t = t.limit ? p < t.x : p <= t.x;
      if (after_s && before_t) c += 1.0;
    }
    return c;
  };
  double best = 0.0;
  for (const End& s : starts) {
    if (s.x < 0.0 || s.x > 1.0) continue;
    std::vector<End> ends{{1.0, false}};
    if (s.x + a <= 1.0) {
      ends.push_back({s.x + a, false, true});
      ends.push_back({s.x + a, true, true});
    } else {
      ends.push_back({1.0, false});
    }
    for (double p : v) {
      ends.push_back({p, false});
      ends.push_back({p, true});
    }
    for (const End& t : ends) {
      if (t.x < s.x) continue;
      const double span = t.full_width ? a : t.x - s.x;
      // A left-limit start widens the true window; a left-limit end narrows it.
      const bool ok = (s.limit && !t.limit) ? span < a : span <= a;
      if (!ok) continue;
      best = std::max(best, std::abs(count(s, t) / n - span));
    }
  }
  return std::sqrt(n) * best;
}

}  // namespace oracle
