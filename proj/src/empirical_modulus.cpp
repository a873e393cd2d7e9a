#include "kspacings/empirical_modulus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kspacings/errors.hpp"

namespace kspacings {

namespace {

void check_bandwidth(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    std::ostringstream msg;
    msg << "bandwidth a must lie in (0,1), got " << a;
    throw DomainError(msg.str());
  }
}

// Indices pushed in increasing order; each index enters and leaves once, so a
// flat buffer with two cursors is enough.
class MonotoneQueue {
 public:
  explicit MonotoneQueue(std::size_t capacity) : buf_(capacity) {}

  // Keeps keys strictly decreasing from front to back.
  template <class Key>
  void push(std::size_t index, Key&& key) {
    const double value = key(index);
    while (tail_ > head_ && key(buf_[tail_ - 1]) <= value) --tail_;
    buf_[tail_++] = index;
  }
  void pop_front() { ++head_; }
  [[nodiscard]] bool empty() const { return head_ == tail_; }
  [[nodiscard]] std::size_t front() const { return buf_[head_]; }

 private:
  std::vector<std::size_t> buf_;
  std::size_t head_ = 0;
  std::size_t tail_ = 0;
};

struct PositivePart {
  double value = 0.0;
  std::optional<PositiveWindow> window;
};

// max over i <= j, V_i > 0, V_j - V_i < a of (j - i + 1)/N - (V_j - V_i).
PositivePart positive_part(std::span<const double> v, double a) {
  const std::size_t n = v.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  PositivePart best;
  // A point at 0 can never sit inside a window (s, s+h] with s >= 0.
  const auto first_positive = static_cast<std::size_t>(
      std::upper_bound(v.begin(), v.end(), 0.0) - v.begin());
  MonotoneQueue queue(n);
  const auto key = [&](std::size_t i) { return v[i] - static_cast<double>(i) * inv_n; };
  std::size_t leftmost = first_positive;
  auto consider = [&](std::size_t i, std::size_t j) {
    const double value = static_cast<double>(j - i + 1) * inv_n - (v[j] - v[i]);
    if (value > best.value) {
      best.value = value;
      best.window = PositiveWindow{i, j};
    }
  };
  for (std::size_t j = first_positive; j < n; ++j) {
    queue.push(j, key);
    while (!(v[j] - v[queue.front()] < a)) queue.pop_front();
    while (!(v[j] - v[leftmost] < a)) ++leftmost;
    consider(queue.front(), j);
    // The widest admissible window is checked explicitly so that the fixed
    // width increment theta never exceeds the computed positive part.
    consider(leftmost, j);
  }
  return best;
}

struct NegativePart {
  double value = 0.0;
  NegativeWindow window;
};

NegativePart negative_part(std::span<const double> v, double a) {
  const std::size_t n = v.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  NegativePart best;
  auto offer = [&](double value, NegativeFamily family, double left, double right,
                   std::size_t count) {
    if (value > best.value) {
      best.value = value;
      best.window = NegativeWindow{family, left, right, count};
    }
  };

  // Gap windows between consecutive extended points e_0 = 0, e_1..e_N = V, e_{N+1} = 1:
  // window (e_p, e_q) holds q - p - 1 points; value (e_q - e_p) - (q - p - 1)/N.
  const std::size_t m = n + 2;
  auto ext = [&](std::size_t idx) {
    if (idx == 0) return 0.0;
    if (idx == m - 1) return 1.0;
    return v[idx - 1];
  };
  MonotoneQueue queue(m);
  const auto key = [&](std::size_t p) { return static_cast<double>(p) * inv_n - ext(p); };
  for (std::size_t q = 1; q < m; ++q) {
    queue.push(q - 1, key);
    const double right = ext(q);
    while (!queue.empty() && right - ext(queue.front()) > a) queue.pop_front();
    if (queue.empty()) continue;
    const std::size_t p = queue.front();
    const std::size_t count = q - p - 1;
    offer((right - ext(p)) - static_cast<double>(count) * inv_n, NegativeFamily::gap, ext(p),
          right, count);
  }

  // Width-a windows. The minimal count over s in [0, 1-a] is attained at s = 0
  // or at s equal to a sample point (sliding s left to the nearest point never
  // increases the count).
  {
    std::size_t upto_s = 0;   // #{V <= s}
    std::size_t upto_sa = 0;  // #{V <= s + a}
    auto width_at = [&](double s) {
      while (upto_s < n && v[upto_s] <= s) ++upto_s;
      const double end = s + a;
      while (upto_sa < n && v[upto_sa] <= end) ++upto_sa;
      const std::size_t count = upto_sa - upto_s;
      offer(a - static_cast<double>(count) * inv_n, NegativeFamily::width, s, end, count);
    };
    width_at(0.0);
    for (std::size_t i = 0; i < n && v[i] <= 1.0 - a; ++i) width_at(v[i]);
  }

  offer(std::min(a, v.front()), NegativeFamily::boundary, 0.0, std::min(a, v.front()), 0);
  offer(std::min(a, 1.0 - v.back()), NegativeFamily::boundary, v.back(),
        v.back() + std::min(a, 1.0 - v.back()), 0);
  return best;
}

std::size_t max_width_count(std::span<const double> v, double a) {
  const std::size_t n = v.size();
  // Window (0, a].
  std::size_t best = 0;
  {
    const auto lo = std::upper_bound(v.begin(), v.end(), 0.0);
    const auto hi = std::upper_bound(v.begin(), v.end(), a);
    best = static_cast<std::size_t>(hi - lo);
  }
  // Windows (V_j - a, V_j] ending on a sample point with V_j >= a.
  std::size_t lo = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (v[j] < a) continue;
    while (!(v[j] - v[lo] < a)) ++lo;
    best = std::max(best, j - lo + 1);
  }
  return best;
}

}  // namespace

std::string_view to_string(NegativeFamily family) {
  switch (family) {
    case NegativeFamily::none:
      return "none";
    case NegativeFamily::gap:
      return "gap";
    case NegativeFamily::width:
      return "width";
    case NegativeFamily::boundary:
      return "boundary";
  }
  return "none";
}

EmpiricalPath EmpiricalPath::from_sorted(std::vector<double> points) {
  if (points.empty()) throw DomainError("empirical path needs at least one point");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double p = points[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "empirical path point " << i << " = " << p << " is outside [0,1]";
      throw DomainError(msg.str());
    }
    if (i > 0 && points[i] < points[i - 1]) {
      throw DomainError("empirical path points must be sorted ascending");
    }
  }
  return EmpiricalPath(std::move(points));
}

EmpiricalPath EmpiricalPath::from_unsorted(std::vector<double> points) {
  std::stable_sort(points.begin(), points.end());
  return from_sorted(std::move(points));
}

std::optional<double> lil_normalizer(double a) {
  check_bandwidth(a);
  const double loglog = std::log(std::log(1.0 / a));
  if (!(loglog > 0.0)) return std::nullopt;
  return std::sqrt(2.0 * a * loglog);
}

std::optional<double> normalized_modulus(double lambda, double a) {
  const auto b = lil_normalizer(a);
  if (!b) return std::nullopt;
  return lambda / *b;
}

double one_sided_increment(const EmpiricalPath& path, double a) {
  check_bandwidth(a);
  const auto v = path.points();
  const double n = static_cast<double>(v.size());
  return std::sqrt(n) * (static_cast<double>(max_width_count(v, a)) / n - a);
}

ModulusReport oscillation_modulus(const EmpiricalPath& path, double a) {
  check_bandwidth(a);
  const auto v = path.points();
  ModulusReport report;
  report.a = a;
  report.n_points = v.size();
  const double root_n = std::sqrt(static_cast<double>(v.size()));

  const PositivePart pos = positive_part(v, a);
  const NegativePart neg = negative_part(v, a);
  report.positive_part = pos.value;
  report.negative_part = neg.value;
  report.pos_window = pos.window;
  report.neg_window = neg.window;
  report.lambda = root_n * std::max(pos.value, neg.value);
  report.b_n = lil_normalizer(a);
  report.k_n = normalized_modulus(report.lambda, a);
  report.theta = one_sided_increment(path, a);
  return report;
}

double brute_force_modulus(const EmpiricalPath& path, double a) {
  check_bandwidth(a);
  const auto v = path.points();
  const std::size_t n = v.size();
  if (n > kBruteForceMaxPoints) {
    throw ResourceError("brute_force_modulus: at most 200 points");
  }
  const double nd = static_cast<double>(n);
  double best = 0.0;
  // Content = sorted indices [lo, hi). A window (s, t] has exactly this content
  // iff s in [left, v[lo]) and t in [v[hi-1], right), where left = v[lo-1] (or 0)
  // and right = v[hi] (or 1, inclusive).
  for (std::size_t lo = 0; lo <= n; ++lo) {
    const double left = (lo == 0) ? 0.0 : v[lo - 1];
    const bool left_open = (lo < n) ? (left < v[lo]) : true;
    for (std::size_t hi = lo; hi <= n; ++hi) {
      const double right = (hi == n) ? 1.0 : v[hi];
      if (hi == lo) {
        // Empty window inside (left, right).
        best = std::max(best, std::min(a, right - left));
        continue;
      }
      if (!left_open) break;  // cannot separate v[lo] from v[lo-1]
      if (hi < n && !(v[hi - 1] < v[hi])) continue;
      const double span = v[hi - 1] - v[lo];
      if (!(span < a)) break;  // longer contents only widen the span
      const double mass = static_cast<double>(hi - lo) / nd;
      const double widest = std::min(a, right - left);
      best = std::max(best, mass - span);
      best = std::max(best, widest - mass);
    }
  }
  return std::sqrt(nd) * best;
}

double grid_modulus_lower_bound(const EmpiricalPath& path, double a) {
  check_bandwidth(a);
  const auto v = path.points();
  const std::size_t n = v.size();
  if (n > kBruteForceMaxPoints) {
    throw ResourceError("grid_modulus_lower_bound: at most 200 points");
  }
  const double nd = static_cast<double>(n);
  const double step = std::min(a, 1.0 / (10.0 * nd));
  auto count_le = [&](double x) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
  };
  double best = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double s = static_cast<double>(i) * step;
    if (s > 1.0) break;
    for (int m = 1; m <= 16; ++m) {
      const double h = a * m / 16.0;
      if (s + h > 1.0) break;
      const double inc = (count_le(s + h) - count_le(s)) / nd - h;
      best = std::max(best, std::abs(inc));
    }
  }
  return std::sqrt(nd) * best;
}

}  // namespace kspacings
