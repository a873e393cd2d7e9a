#include "kspacings/transform_maps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"
#include "kspacings/spacings_lab.hpp"

namespace kspacings {

namespace {

using gamma::Order;

// x with H_k(x) = h, from log h.
double lower_point(Order order, double log_h) {
  if (log_h <= std::log(0.5)) return gamma::lower_quantile_log(order, log_h);
  return gamma::upper_quantile_log(order, std::log1p(-std::exp(log_h)));
}

// x with 1 - H_k(x) = h, from log h.
double upper_point(Order order, double log_h) {
  if (log_h <= std::log(0.5)) return gamma::upper_quantile_log(order, log_h);
  return gamma::lower_quantile_log(order, std::log1p(-std::exp(log_h)));
}

// Below this log x the lower tail is H_k(x) = x^k / k! to double precision,
// which keeps the left ends exact where the quantile itself underflows.
constexpr double kDeepLogX = -46.0;

// log of the leading-order lower quantile, (log h + log k!) / k.
double log_lower_point_leading(Order order, double log_h) {
  return (log_h + gamma::log_factorial(order.k())) / order.k();
}

IncrementReport with_exact_bandwidth(IncrementReport report, double a) {
  if (report.argmax_h == report.a) report.argmax_h = a;
  report.a = a;
  return report;
}

void check_mu(const PsiMap& map) {
  if (!(map.mu > 0.0) || !std::isfinite(map.mu)) {
    throw DomainError("psi map: mu must be positive and finite");
  }
}

void check_log_bandwidth(double log_a) {
  if (!(log_a < 0.0) || std::isnan(log_a) || std::isinf(log_a)) {
    throw DomainError("increment sup: bandwidth must lie in (0,1)");
  }
}

// log psi(h) = log Psi_h(0).
double log_psi_left(const PsiMap& map, double log_h) {
  if (map.mu == 1.0) return log_h;
  const Order order(map.k);
  if (log_lower_point_leading(order, log_h) + std::max(0.0, std::log(map.mu)) < kDeepLogX) {
    return log_h + map.k * std::log(map.mu);
  }
  return gamma::log_cdf(order, map.mu * lower_point(order, log_h));
}

// log(1 - psi(1 - h)) = log Psi_h(1 - h).
double log_psi_right(const PsiMap& map, double log_h) {
  if (map.mu == 1.0) return log_h;
  const Order order(map.k);
  return gamma::log_survival(order, map.mu * upper_point(order, log_h));
}

double log_phi_at(Order order, double x) { return gamma::log_pdf(order, x) + std::log(x); }

template <class Left, class Right>
void scan_widths(IncrementReport& report, Left&& left, Right&& right) {
  report.log_sup = -std::numeric_limits<double>::infinity();
  const double log_span = std::log(kIncrementGridSpan);
  for (int m = 0; m < kIncrementGridPoints; ++m) {
    const double t = 1.0 - static_cast<double>(m) / (kIncrementGridPoints - 1);
    const double log_h = (m == kIncrementGridPoints - 1) ? report.log_a : report.log_a + t * log_span;
    const double l = left(log_h);
    const double r = right(log_h);
    const bool right_wins = r > l;
    const double best = right_wins ? r : l;
    if (best > report.log_sup) {
      report.log_sup = best;
      report.argmax_h = std::exp(log_h);
      report.argmax_end = right_wins ? Endpoint::right : Endpoint::left;
    }
  }
  report.sup_value = std::exp(report.log_sup);
}

double parse_double(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw DomainError("cannot parse number '" + s + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(Endpoint end) { return end == Endpoint::left ? "left" : "right"; }

double psi_eval(const PsiMap& map, double s) {
  check_mu(map);
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("psi_eval: s must lie in [0,1]");
  if (s == 0.0 || s == 1.0 || map.mu == 1.0) return s;
  const Order order(map.k);
  return gamma::cdf(order, map.mu * gamma::quantile(order, s));
}

double phi_eval(const PhiMap& map, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("phi_eval: s must lie in [0,1]");
  if (s == 0.0 || s == 1.0) return 0.0;
  const Order order(map.k);
  return std::exp(log_phi_at(order, gamma::quantile(order, s)));
}

IncrementReport psi_increment_sup_log(const PsiMap& map, double log_a) {
  check_mu(map);
  check_log_bandwidth(log_a);
  IncrementReport report;
  report.k = map.k;
  report.mu = map.mu;
  report.log_a = log_a;
  report.a = std::exp(log_a);
  scan_widths(
      report, [&](double lh) { return log_psi_left(map, lh); },
      [&](double lh) { return log_psi_right(map, lh); });
  report.ratio = std::exp(report.log_sup - log_a);
  const double log_scale =
      map.mu * log_a + (map.k - 1.0) * (1.0 - map.mu) * std::log(-log_a);
  report.secondary_ratio = std::exp(log_psi_right(map, log_a) - log_scale);
  return report;
}

IncrementReport psi_increment_sup(const PsiMap& map, double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("psi_increment_sup: a must lie in (0,1)");
  return with_exact_bandwidth(psi_increment_sup_log(map, std::log(a)), a);
}

IncrementReport phi_increment_sup_log(const PhiMap& map, double log_a) {
  check_log_bandwidth(log_a);
  if (!(log_a < -1.0)) {
    throw DomainError("phi_increment_sup: a must be below 1/e so that log(1/a) > 1");
  }
  const Order order(map.k);
  IncrementReport report;
  report.k = map.k;
  report.log_a = log_a;
  report.a = std::exp(log_a);
  scan_widths(
      report,
      [&](double lh) {
        if (log_lower_point_leading(order, lh) < kDeepLogX) return lh + std::log(static_cast<double>(order.k()));
        return log_phi_at(order, lower_point(order, lh));
      },
      [&](double lh) { return log_phi_at(order, upper_point(order, lh)); });
  const double log_scale = log_a + std::log(-log_a);
  report.ratio = std::exp(report.log_sup - log_scale);
  report.competing_scale = std::exp(std::max(std::log(static_cast<double>(map.k)) + log_a, log_scale));
  return report;
}

IncrementReport phi_increment_sup(const PhiMap& map, double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("phi_increment_sup: a must lie in (0,1)");
  return with_exact_bandwidth(phi_increment_sup_log(map, std::log(a)), a);
}

Lemma parse_lemma(std::string_view name) {
  if (name == "a1" || name == "A1") return Lemma::A1;
  if (name == "a2" || name == "A2") return Lemma::A2;
  if (name == "a3" || name == "A3") return Lemma::A3;
  if (name == "a4" || name == "A4") return Lemma::A4;
  if (name == "p1" || name == "P1") return Lemma::P1;
  throw DomainError("unknown lemma '" + std::string(name) + "'");
}

std::string_view to_string(Lemma lemma) {
  switch (lemma) {
    case Lemma::A1:
      return "A1";
    case Lemma::A2:
      return "A2";
    case Lemma::A3:
      return "A3";
    case Lemma::A4:
      return "A4";
    case Lemma::P1:
      return "P1";
  }
  return "?";
}

GridPoint GridPoint::parse(std::string_view text) {
  if (text == "kd") return {Kind::k_delta, 0.0};
  if (text.starts_with("t*")) {
    const double f = parse_double(text.substr(2));
    if (!(f > 0.0 && f <= 1.0)) throw DomainError("threshold fraction must lie in (0,1]");
    return {Kind::threshold_fraction, f};
  }
  const double a = parse_double(text);
  if (!(a > 0.0 && a < 1.0)) throw DomainError("bandwidth must lie in (0,1)");
  return {Kind::absolute, a};
}

double resolve_log_bandwidth(const GridPoint& point, std::uint32_t k,
                             std::optional<double> delta) {
  switch (point.kind) {
    case GridPoint::Kind::absolute:
      return std::log(point.value);
    case GridPoint::Kind::threshold_fraction:
      if (!delta) throw PreconditionError("grid point t*f needs delta");
      return std::log(point.value) + gamma::tail_threshold(k, *delta).log_value;
    case GridPoint::Kind::k_delta:
      if (!delta) throw PreconditionError("grid point kd needs delta");
      return -0.5 * std::pow(static_cast<double>(k), *delta);
  }
  return 0.0;
}

std::vector<IncrementReport> lemma_diagnostics(Lemma lemma,
                                               std::span<const std::uint32_t> k_schedule,
                                               std::span<const GridPoint> a_grid,
                                               const MuSource& mu_source,
                                               std::optional<double> delta) {
  const bool gated = lemma == Lemma::A3 || lemma == Lemma::A4 || lemma == Lemma::P1;
  if (gated && !delta) {
    throw PreconditionError("lemma " + std::string(to_string(lemma)) + " requires delta");
  }
  std::vector<IncrementReport> reports;
  for (std::uint32_t k : k_schedule) {
    const Order order(k);
    const double mu = std::visit(
        [&](const auto& src) -> double {
          using T = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<T, FixedMu>) {
            return src.value;
          } else {
            return sample_spacings(k, src.n_spacings, src.seed).mu;
          }
        },
        mu_source);

    std::vector<double> log_grid;
    for (const GridPoint& point : a_grid) log_grid.push_back(resolve_log_bandwidth(point, k, delta));
    for (std::size_t i = 1; i < log_grid.size(); ++i) {
      if (!(log_grid[i] < log_grid[i - 1])) {
        throw PreconditionError("a_grid must be strictly decreasing (k=" + std::to_string(k) + ")");
      }
    }
    const std::optional<double> log_threshold =
        delta ? std::optional<double>(gamma::tail_threshold(k, *delta).log_value) : std::nullopt;

    for (std::size_t g = 0; g < log_grid.size(); ++g) {
      const double log_a = log_grid[g];
      if (gated && log_a > *log_threshold) {
        std::ostringstream msg;
        msg << "regime violation for lemma " << to_string(lemma) << ": a = exp(" << log_a
            << ") exceeds t_k(delta) = exp(" << *log_threshold << ") at k = " << k;
        throw PreconditionError(msg.str());
      }
      switch (lemma) {
        case Lemma::A1:
        case Lemma::A3:
          reports.push_back(psi_increment_sup_log(PsiMap{k, mu}, log_a));
          break;
        case Lemma::A2:
        case Lemma::A4:
          reports.push_back(phi_increment_sup_log(PhiMap{k}, log_a));
          reports.back().mu = mu;
          break;
        case Lemma::P1: {
          const gamma::TailApprox t = gamma::quantile_tail_approx_log(order, log_a, *delta);
          IncrementReport r;
          r.k = k;
          r.mu = mu;
          r.log_a = log_a;
          r.a = std::exp(log_a);
          r.sup_value = t.measured_error;
          r.log_sup = std::log(t.measured_error);
          r.argmax_h = r.a;
          r.argmax_end = Endpoint::right;
          const double scale = std::log(static_cast<double>(k)) *
                               std::pow(static_cast<double>(k), 1.0 - *delta);
          r.ratio = scale > 0.0 ? t.measured_error / scale
                                : std::numeric_limits<double>::quiet_NaN();
          reports.push_back(r);
          break;
        }
      }
      // Report user-supplied bandwidths as given rather than exp(log a).
      if (a_grid[g].kind == GridPoint::Kind::absolute) {
        IncrementReport& r = reports.back();
        if (r.argmax_h == r.a) r.argmax_h = a_grid[g].value;
        r.a = a_grid[g].value;
      }
    }
  }
  return reports;
}

}  // namespace kspacings
