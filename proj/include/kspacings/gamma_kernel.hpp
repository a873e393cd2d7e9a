#pragma once

// Gamma distribution with integer shape k and unit scale.
//
// H_k(x) = int_0^x t^{k-1} e^{-t} / (k-1)! dt is the limit law of Nk times a
// single non-overlapping k-spacing. Integer shape means the upper tail is the
// finite Poisson sum e^{-x} sum_{j<k} x^j / j!, so every routine here is exact
// up to floating point rounding; no continued fractions are involved.
//
// Every probability has a log-space twin. Deep-tail work (bandwidths of order
// t_k(delta)) must stay in log space because the linear values underflow.

#include <cstdint>
#include <optional>

namespace kspacings::gamma {

inline constexpr std::uint32_t kMaxOrder = 1'000'000;

/// Integer shape parameter k, 1 <= k <= kMaxOrder.
class Order {
 public:
  explicit Order(std::int64_t k);

  [[nodiscard]] std::uint32_t k() const noexcept { return k_; }

  friend bool operator==(Order, Order) = default;

 private:
  std::uint32_t k_;
};

/// log(m!) by compensated summation of log(2) ... log(m). The prefix table is
/// built once, on first use, for m up to kMaxOrder.
[[nodiscard]] double log_factorial(std::uint32_t m);

[[nodiscard]] double cdf(Order order, double x);
[[nodiscard]] double survival(Order order, double x);
[[nodiscard]] double log_cdf(Order order, double x);
[[nodiscard]] double log_survival(Order order, double x);

/// Density x^{k-1} e^{-x} / (k-1)!; requires x > 0.
[[nodiscard]] double pdf(Order order, double x);
[[nodiscard]] double log_pdf(Order order, double x);

/// x with H_k(x) = s for s in (0,1). |H_k(x) - s| <= 1e-12 and, when s is
/// close to 1, |(1 - H_k(x)) - (1 - s)| <= 1e-10 * (1 - s).
[[nodiscard]] double quantile(Order order, double s);

/// x with log H_k(x) = log_s. Relative accuracy 1e-13 on H_k(x).
[[nodiscard]] double lower_quantile_log(Order order, double log_s);

/// x with log(1 - H_k(x)) = log_q. Relative accuracy 1e-13 on the survival
/// probability, valid far below the double underflow threshold.
[[nodiscard]] double upper_quantile_log(Order order, double log_q);

struct TailBounds {
  double lower;
  double upper;
  double log_lower;
  double log_upper;
};

/// Bracket x^{k-1}e^{-x}/(k-1)! <= 1 - H_k(x) <= (1 - k/x)^{-1} x^{k-1}e^{-x}/(k-1)!.
/// Requires x > k.
[[nodiscard]] TailBounds tail_bounds(Order order, double x);

/// t_k(delta) = k^{k(delta-2)} exp(-k^delta / 2), held in log space.
struct TailThreshold {
  std::uint32_t k;
  double delta;
  double log_value;

  /// exp(log_value), or nullopt when it underflows a double.
  [[nodiscard]] std::optional<double> value() const;
  [[nodiscard]] bool sub_underflow() const { return !value().has_value(); }
};

[[nodiscard]] TailThreshold tail_threshold(std::int64_t k, double delta);

struct TailApprox {
  double approx;          ///< log(1/s)
  double exact;           ///< H_k^{-1}(1 - s)
  double measured_error;  ///< |exact / approx - 1|
};

/// Compares the upper quantile at survival level s with the leading-order
/// approximation log(1/s). Requires 0 < s <= t_k(delta).
[[nodiscard]] TailApprox quantile_tail_approx(Order order, double s, double delta);
[[nodiscard]] TailApprox quantile_tail_approx_log(Order order, double log_s, double delta);

}  // namespace kspacings::gamma
