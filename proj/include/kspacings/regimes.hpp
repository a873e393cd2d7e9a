#pragma once

// Bandwidth families, growth rules for k, the side conditions attached to each
// limit theorem, and the limiting constants the Monte Carlo harness compares
// against.
//
//   I    a_N = N^{-c}, 0 < c < 1 (one schedule satisfying S1-S3)
//   II   a_N = c log N / N
//   III  a_N = (log N)^{-c}
//   IV   a_N = c_N log N / N with c_N -> 0 (default c_N = 1 / log log N)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kspacings {

enum class Variant { I, II, III, IV };

[[nodiscard]] std::string_view to_string(Variant v);
[[nodiscard]] Variant parse_variant(std::string_view text);

struct KMode {
  bool growing = false;
  std::uint32_t fixed_k = 1;
  std::string rule = "loglog";  ///< growing: k(N) = max(2, floor(log log N) + 1)

  static KMode fixed(std::uint32_t k) { return KMode{false, k, "loglog"}; }
  static KMode grow(std::string rule = "loglog") { return KMode{true, 0, std::move(rule)}; }
};

struct RegimeSpec {
  Variant variant = Variant::II;
  double c = 1.0;
  /// Variant I: "power" (a_N = N^{-c}). Variant IV: "inv_loglog" or
  /// "loglog_pow:<p>" (c_N = (log log N)^{-p}). Ignored for II and III.
  std::string c_schedule;
  KMode k_mode;
  std::optional<double> delta;

  /// Throws PreconditionError on inconsistent parameters.
  void validate() const;
};

[[nodiscard]] std::uint32_t k_for(const RegimeSpec& spec, std::uint64_t n_spacings);

/// c_N for variant IV.
[[nodiscard]] double c_sequence(const RegimeSpec& spec, std::uint64_t n_spacings);

/// a_N. With growing k also enforces a_N <= t_k(delta).
[[nodiscard]] double bandwidth(const RegimeSpec& spec, std::uint64_t n_spacings);

/// The root beta > 1 of beta (log beta - 1) = 1/c - 1.
[[nodiscard]] double erdos_renyi_beta(double c);

/// (s/2)^{1/2} (beta(s) - 1).
[[nodiscard]] double h_function(double s);

enum class RequiredLimit { zero, infinity };
enum class Verdict { consistent_trend, inconsistent, inconclusive };

[[nodiscard]] std::string_view to_string(RequiredLimit l);
[[nodiscard]] std::string_view to_string(Verdict v);

inline constexpr double kTrendSlopeThreshold = 0.05;

struct ConditionReport {
  std::string id;
  std::vector<std::uint64_t> n_grid;
  std::vector<double> values;
  RequiredLimit required = RequiredLimit::zero;
  Verdict verdict = Verdict::inconclusive;
  double slope = 0.0;
  bool applicable = true;
  /// Q4 only: the same expression without the k^{-1/2} prefactor.
  std::vector<double> extra;
};

/// Least-squares slope of log(value) against log(log N); nullopt if any value
/// is not finite and positive or the grid has fewer than two points.
[[nodiscard]] std::optional<double> trend_slope(std::span<const std::uint64_t> n_grid,
                                                std::span<const double> values);

[[nodiscard]] Verdict trend_verdict(std::span<const std::uint64_t> n_grid,
                                    std::span<const double> values, RequiredLimit required);

/// Evaluates S1-S3, Q1-Q5, K, W1-W3 along an increasing grid with N >= 16.
[[nodiscard]] std::vector<ConditionReport> check_conditions(const RegimeSpec& spec,
                                                            std::span<const std::uint64_t> n_grid);

struct LimitTarget {
  enum class Kind { point, interval, upper_bound };
  enum class Scaling { k_n, d_n };
  Kind kind = Kind::point;
  double lo = 0.0;
  double hi = 0.0;
  Scaling scaling = Scaling::k_n;
};

[[nodiscard]] std::string_view to_string(LimitTarget::Kind kind);

[[nodiscard]] LimitTarget limit_target(const RegimeSpec& spec);

/// d_N = N^{1/2} (log N)^{-1} log(1/c_N). Requires N >= 3 and 0 < c_N < 1.
[[nodiscard]] double d_scaling(std::uint64_t n_spacings, double c_n);

}  // namespace kspacings
