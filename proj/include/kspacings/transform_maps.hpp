#pragma once

// The time change psi(s) = H_k(mu H_k^{-1}(s)) and the drift shape
// phi(s) = H_k'(H_k^{-1}(s)) H_k^{-1}(s), together with the suprema of their
// increments over windows of width at most a.
//
// psi'(s) = mu^k exp((1 - mu) H_k^{-1}(s)) and phi'(s) = k - H_k^{-1}(s) are
// both monotone in s, so for every width h the increment s -> f(s+h) - f(s)
// is monotone and its supremum sits at s = 0 or s = 1 - h. Only those two
// endpoints are evaluated, in log space, which keeps bandwidths far below the
// double underflow threshold usable.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace kspacings {

struct PsiMap {
  std::uint32_t k;
  double mu;
};

struct PhiMap {
  std::uint32_t k;
};

enum class Endpoint { left, right };

[[nodiscard]] std::string_view to_string(Endpoint end);

struct IncrementReport {
  std::uint32_t k = 0;
  double mu = 1.0;
  double a = 0.0;
  double log_a = 0.0;
  double sup_value = 0.0;
  double log_sup = 0.0;
  /// sup / a for psi, sup / (a log(1/a)) for phi, error / (log k k^{1-delta}) for P1.
  double ratio = 0.0;
  double argmax_h = 0.0;
  Endpoint argmax_end = Endpoint::left;
  /// phi only: max(k a, a log(1/a)).
  std::optional<double> competing_scale;
  /// psi only: right-end increment over a^mu (log 1/a)^{(k-1)(1-mu)}.
  std::optional<double> secondary_ratio;
};

[[nodiscard]] double psi_eval(const PsiMap& map, double s);
[[nodiscard]] double phi_eval(const PhiMap& map, double s);

inline constexpr int kIncrementGridPoints = 256;
/// Smallest grid width relative to a.
inline constexpr double kIncrementGridSpan = 1e-6;

/// sup over 0 < h <= a, 0 <= s <= 1-h of |psi(s+h) - psi(s)|. Requires 0 < a < 1.
[[nodiscard]] IncrementReport psi_increment_sup(const PsiMap& map, double a);
[[nodiscard]] IncrementReport psi_increment_sup_log(const PsiMap& map, double log_a);

/// sup over 0 < h <= a, 0 <= s <= 1-h of |phi(s+h) - phi(s)|. Requires 0 < a < 1/e.
[[nodiscard]] IncrementReport phi_increment_sup(const PhiMap& map, double a);
[[nodiscard]] IncrementReport phi_increment_sup_log(const PhiMap& map, double log_a);

enum class Lemma { A1, A2, A3, A4, P1 };

[[nodiscard]] Lemma parse_lemma(std::string_view name);
[[nodiscard]] std::string_view to_string(Lemma lemma);

/// One bandwidth of a diagnostic grid, resolved per k.
struct GridPoint {
  enum class Kind {
    absolute,           ///< value is a
    threshold_fraction, ///< a = value * t_k(delta)
    k_delta,            ///< a = exp(-k^delta / 2)
  };
  Kind kind = Kind::absolute;
  double value = 0.0;

  /// Parses "1e-4", "t*0.5" or "kd".
  static GridPoint parse(std::string_view text);
};

struct FixedMu {
  double value;
};
struct SimulatedMu {
  std::uint64_t seed;
  std::int64_t n_spacings;
};
using MuSource = std::variant<FixedMu, SimulatedMu>;

/// log a for a grid point at order k.
[[nodiscard]] double resolve_log_bandwidth(const GridPoint& point, std::uint32_t k,
                                           std::optional<double> delta);

/// One report per (k, a) pair. For A3, A4 and P1 every a must satisfy
/// a <= t_k(delta); the grid must be strictly decreasing for every k.
[[nodiscard]] std::vector<IncrementReport> lemma_diagnostics(
    Lemma lemma, std::span<const std::uint32_t> k_schedule, std::span<const GridPoint> a_grid,
    const MuSource& mu_source, std::optional<double> delta);

}  // namespace kspacings
