#pragma once

// Oscillation modulus of a uniform-type empirical path
//
//   R(s) = sqrt(N) (G(s) - s),   G(s) = #{V_i <= s} / N,
//   Lambda(a) = sup_{0 <= h <= a} sup_{0 <= s <= 1-h} |R(s+h) - R(s)|.
//
// Increments are taken over half-open windows (s, s+h]. Because R is a step
// function minus a line, every candidate supremum is an affine functional of
// the sorted points and their ranks, which is what makes an exact O(N)
// evaluation possible:
//
//   positive part  max over i <= j with V_(j) - V_(i) < a of
//                  (j - i + 1)/N - (V_(j) - V_(i));
//   negative part  max of
//                  gap windows   (V_(q) - V_(p)) - (q - p - 1)/N over pairs with
//                                span <= a, with virtual points 0 and 1 at the ends;
//                  width windows a - (min count in any (s, s+a]) / N;
//                  boundaries    min(a, V_(1)) and min(a, 1 - V_(N)).
//
// Windows whose optimal end touches a sample point contribute their limiting
// value, matching the supremum. Both sliding maxima use a monotone deque.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace kspacings {

/// Sorted points in [0,1].
class EmpiricalPath {
 public:
  /// Validates that the points are sorted ascending and lie in [0,1].
  static EmpiricalPath from_sorted(std::vector<double> points);
  /// Sorts first.
  static EmpiricalPath from_unsorted(std::vector<double> points);

  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

 private:
  explicit EmpiricalPath(std::vector<double> points) : points_(std::move(points)) {}
  std::vector<double> points_;
};

enum class NegativeFamily { none, gap, width, boundary };

[[nodiscard]] std::string_view to_string(NegativeFamily family);

/// Window achieving the positive part: sorted indices [first, last] (0-based).
struct PositiveWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Window achieving the negative part: (left, right) with `count` points inside.
struct NegativeWindow {
  NegativeFamily family = NegativeFamily::none;
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

struct ModulusReport {
  double a = 0.0;
  std::size_t n_points = 0;
  double lambda = 0.0;
  double positive_part = 0.0;  ///< P, before the sqrt(N) factor
  double negative_part = 0.0;  ///< M, before the sqrt(N) factor
  std::optional<double> b_n;   ///< (2a log log(1/a))^{1/2}, undefined for a >= 1/e
  std::optional<double> k_n;   ///< lambda / b_n
  double theta = 0.0;
  std::optional<PositiveWindow> pos_window;
  NegativeWindow neg_window;
};

/// Exact Lambda, theta and k_N in O(N). Requires 0 < a < 1.
[[nodiscard]] ModulusReport oscillation_modulus(const EmpiricalPath& path, double a);

/// (2a log log(1/a))^{1/2}; nullopt when a >= 1/e.
[[nodiscard]] std::optional<double> lil_normalizer(double a);

/// lambda / lil_normalizer(a), or nullopt when the normalizer is undefined.
[[nodiscard]] std::optional<double> normalized_modulus(double lambda, double a);

/// sup_{0 <= s <= 1-a} (R(s+a) - R(s)) = sqrt(N) (C_max/N - a), where C_max is
/// the largest number of points in a window (s, s+a]. May be negative.
[[nodiscard]] double one_sided_increment(const EmpiricalPath& path, double a);

inline constexpr std::size_t kBruteForceMaxPoints = 200;

/// Exhaustive O(N^2) evaluation of Lambda over every achievable window
/// content. Test oracle; N <= 200.
[[nodiscard]] double brute_force_modulus(const EmpiricalPath& path, double a);

/// Lambda evaluated on an s-grid of step min(a, 1/(10N)) with 16 widths per
/// start. A lower bound on the exact modulus; N <= 200.
[[nodiscard]] double grid_modulus_lower_bound(const EmpiricalPath& path, double a);

}  // namespace kspacings
