#include "kspacings/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"

namespace kspacings {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double loglog(double x) { return std::log(std::log(x)); }

// "loglog_pow:<p>" -> p; "inv_loglog" or "" -> 1.
double iv_power(const std::string& schedule) {
  if (schedule.empty() || schedule == "inv_loglog") return 1.0;
  constexpr std::string_view prefix = "loglog_pow:";
  if (schedule.rfind(prefix, 0) == 0) {
    const std::string tail = schedule.substr(prefix.size());
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tail.size() || !(p > 0.0)) {
      throw PreconditionError("c_schedule '" + schedule + "': exponent must be a positive number");
    }
    return p;
  }
  throw PreconditionError("unknown c_schedule '" + schedule + "' for variant IV");
}

// a_N before the growing-k gate.
double raw_bandwidth(const RegimeSpec& spec, std::uint64_t n_spacings) {
  const double n = static_cast<double>(n_spacings);
  switch (spec.variant) {
    case Variant::I:
      return std::pow(n, -spec.c);
    case Variant::II:
      return spec.c * std::log(n) / n;
    case Variant::III:
      return std::pow(std::log(n), -spec.c);
    case Variant::IV:
      return c_sequence(spec, n_spacings) * std::log(n) / n;
  }
  return kNaN;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::I:
      return "I";
    case Variant::II:
      return "II";
    case Variant::III:
      return "III";
    case Variant::IV:
      return "IV";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  if (text == "I") return Variant::I;
  if (text == "II") return Variant::II;
  if (text == "III") return Variant::III;
  if (text == "IV") return Variant::IV;
  throw PreconditionError("unknown regime '" + std::string(text) + "' (expected I, II, III or IV)");
}

std::string_view to_string(RequiredLimit l) { return l == RequiredLimit::zero ? "0" : "+inf"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent_trend:
      return "consistent-trend";
    case Verdict::inconsistent:
      return "inconsistent";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string_view to_string(LimitTarget::Kind kind) {
  switch (kind) {
    case LimitTarget::Kind::point:
      return "point";
    case LimitTarget::Kind::interval:
      return "interval";
    case LimitTarget::Kind::upper_bound:
      return "upper-bound";
  }
  return "?";
}

void RegimeSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("regime: c must be positive");
  switch (variant) {
    case Variant::I:
      if (!(c < 1.0)) throw PreconditionError("regime I: a_N = N^{-c} needs 0 < c < 1");
      if (!c_schedule.empty() && c_schedule != "power") {
        throw PreconditionError("regime I: c_schedule must be 'power'");
      }
      break;
    case Variant::II:
    case Variant::III:
      if (!c_schedule.empty() && c_schedule != "const") {
        throw PreconditionError("regimes II and III take a constant c");
      }
      break;
    case Variant::IV:
      (void)iv_power(c_schedule);
      break;
  }
  if (delta && !(*delta > 2.0)) throw PreconditionError("delta must exceed 2");
  if (k_mode.growing) {
    if (k_mode.rule != "loglog") {
      throw PreconditionError("unknown k growth rule '" + k_mode.rule + "'");
    }
    if (!delta) throw PreconditionError("growing k requires delta > 2");
  } else if (k_mode.fixed_k < 1 || k_mode.fixed_k > gamma::kMaxOrder) {
    throw PreconditionError("fixed k out of range");
  }
}

std::uint32_t k_for(const RegimeSpec& spec, std::uint64_t n_spacings) {
  if (!spec.k_mode.growing) return spec.k_mode.fixed_k;
  if (n_spacings < 3) throw PreconditionError("growing k needs N >= 3");
  const double ll = loglog(static_cast<double>(n_spacings));
  return std::max<std::uint32_t>(2, static_cast<std::uint32_t>(std::floor(ll)) + 1);
}

double c_sequence(const RegimeSpec& spec, std::uint64_t n_spacings) {
  if (spec.variant != Variant::IV) return spec.c;
  if (n_spacings < 3) throw PreconditionError("c_N needs N >= 3");
  const double p = iv_power(spec.c_schedule);
  const double c_n = std::pow(loglog(static_cast<double>(n_spacings)), -p);
  if (!(c_n > 0.0 && c_n < 1.0)) {
    std::ostringstream msg;
    msg << "regime IV: c_N = " << c_n << " outside (0,1) at N = " << n_spacings;
    throw PreconditionError(msg.str());
  }
  return c_n;
}

double bandwidth(const RegimeSpec& spec, std::uint64_t n_spacings) {
  if (n_spacings < 3) throw PreconditionError("bandwidth: N must be >= 3");
  const double a = raw_bandwidth(spec, n_spacings);
  if (!(a > 0.0 && a < 1.0)) {
    std::ostringstream msg;
    msg << "regime " << to_string(spec.variant) << ": a_N = " << a << " outside (0,1) at N = "
        << n_spacings;
    throw PreconditionError(msg.str());
  }
  if (spec.k_mode.growing) {
    if (!spec.delta) throw PreconditionError("growing k requires delta");
    const std::uint32_t k = k_for(spec, n_spacings);
    const auto t = gamma::tail_threshold(k, *spec.delta);
    if (std::log(a) > t.log_value) {
      std::ostringstream msg;
      msg << "regime violation (a_N <= t_k(delta)): a_N = " << a << " > t_k(delta) = exp("
          << t.log_value << ") at N = " << n_spacings << ", k = " << k
          << ", delta = " << *spec.delta;
      throw PreconditionError(msg.str());
    }
  }
  return a;
}

double erdos_renyi_beta(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("erdos_renyi_beta: c must be positive");
  const double target = 1.0 / c - 1.0;
  const auto g = [](double x) { return x * (std::log(x) - 1.0); };
  // g is strictly increasing on (1, inf) since g'(x) = log x.
  double lo = 1.0 + 1e-15;
  double hi = 2.0;
  while (g(hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  if (g(lo) >= target) return lo;
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = (std::abs(g(lo) - target) <= std::abs(g(hi) - target)) ? lo : hi;
  // Newton polish from the bisection point; keep a step only if it helps.
  for (int iter = 0; iter < 3; ++iter) {
    const double next = x - (g(x) - target) / std::log(x);
    if (!(next > 1.0) || std::abs(g(next) - target) >= std::abs(g(x) - target)) break;
    x = next;
  }
  return x;
}

double h_function(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("h_function: s must be positive");
  return std::sqrt(0.5 * s) * (erdos_renyi_beta(s) - 1.0);
}

std::optional<double> trend_slope(std::span<const std::uint64_t> n_grid,
                                  std::span<const double> values) {
  if (n_grid.size() != values.size() || n_grid.size() < 2) return std::nullopt;
  double sx = 0.0;
  double sy = 0.0;
  const double m = static_cast<double>(n_grid.size());
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) return std::nullopt;
    xs.push_back(loglog(static_cast<double>(n_grid[i])));
    ys.push_back(std::log(values[i]));
    sx += xs.back();
    sy += ys.back();
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - sx / m) * (xs[i] - sx / m);
    sxy += (xs[i] - sx / m) * (ys[i] - sy / m);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  return sxy / sxx;
}

Verdict trend_verdict(std::span<const std::uint64_t> n_grid, std::span<const double> values,
                      RequiredLimit required) {
  const auto slope = trend_slope(n_grid, values);
  if (!slope) return Verdict::inconclusive;
  // A constant positive sequence tends neither to 0 nor to infinity.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return Verdict::inconsistent;
  }
  if (std::abs(*slope) <= kTrendSlopeThreshold) return Verdict::inconclusive;
  const bool rising = *slope > 0.0;
  const bool wanted = (required == RequiredLimit::infinity) == rising;
  return wanted ? Verdict::consistent_trend : Verdict::inconsistent;
}

std::vector<ConditionReport> check_conditions(const RegimeSpec& spec,
                                              std::span<const std::uint64_t> n_grid) {
  spec.validate();
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 16) throw PreconditionError("check_conditions: every N must be >= 16");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw PreconditionError("check_conditions: N grid must be increasing");
    }
  }
  const bool iv = spec.variant == Variant::IV;
  const bool growing = spec.k_mode.growing;
  struct Def {
    const char* id;
    RequiredLimit required;
    bool applicable;
  };
  const Def defs[] = {
      {"S1", RequiredLimit::infinity, true}, {"S2", RequiredLimit::zero, true},
      {"S3", RequiredLimit::infinity, true}, {"Q1", RequiredLimit::zero, true},
      {"Q3", RequiredLimit::zero, true},     {"Q4", RequiredLimit::zero, true},
      {"Q5", RequiredLimit::zero, iv},       {"K", RequiredLimit::zero, growing},
      {"Q2", RequiredLimit::infinity, growing}, {"W1", RequiredLimit::zero, iv},
      {"W2", RequiredLimit::infinity, iv},   {"W3", RequiredLimit::zero, iv},
  };
  std::vector<ConditionReport> reports;
  for (const Def& d : defs) {
    ConditionReport r;
    r.id = d.id;
    r.n_grid.assign(n_grid.begin(), n_grid.end());
    r.required = d.required;
    r.applicable = d.applicable;
    reports.push_back(std::move(r));
  }
  auto report_for = [&](std::string_view id) -> ConditionReport& {
    return *std::find_if(reports.begin(), reports.end(),
                         [&](const ConditionReport& r) { return r.id == id; });
  };

  for (std::uint64_t big_n : n_grid) {
    const double nd = static_cast<double>(big_n);
    const double k = k_for(spec, big_n);
    const double n = nd * k - 1.0;
    const double a = raw_bandwidth(spec, big_n);
    const double log_inv_a = -std::log(a);
    const double lln = loglog(n);
    const double llN = loglog(nd);
    const double log_n_big = std::log(nd);
    const double b = log_inv_a > 1.0 ? std::sqrt(2.0 * a * std::log(log_inv_a)) : kNaN;
    const double c_n = iv ? c_sequence(spec, big_n) : kNaN;

    report_for("S1").values.push_back(nd * a);
    report_for("S2").values.push_back(log_inv_a / (nd * a));
    report_for("S3").values.push_back(log_inv_a / llN);
    report_for("Q1").values.push_back(std::sqrt(lln / n) * log_inv_a);
    report_for("Q3").values.push_back(lln * lln / (nd * a * log_inv_a));
    report_for("Q4").values.push_back(std::sqrt(2.0 * lln) * b / std::sqrt(k));
    report_for("Q4").extra.push_back(std::sqrt(2.0 * lln) * b);
    report_for("Q5").values.push_back(iv ? log_inv_a * llN * std::pow(log_n_big, 3) /
                                               (log_n_big * std::sqrt(k) * log_n_big * nd) * c_n
                                         : kNaN);
    report_for("K").values.push_back(k * lln / nd);
    report_for("Q2").values.push_back(k);
    report_for("W1").values.push_back(c_n);
    report_for("W2").values.push_back(c_n * log_n_big);
    report_for("W3").values.push_back(iv ? std::log(1.0 / c_n) * llN / log_n_big : kNaN);
  }
  for (ConditionReport& r : reports) {
    r.slope = trend_slope(r.n_grid, r.values).value_or(kNaN);
    r.verdict = trend_verdict(r.n_grid, r.values, r.required);
  }
  return reports;
}

LimitTarget limit_target(const RegimeSpec& spec) {
  switch (spec.variant) {
    case Variant::I:
      return {LimitTarget::Kind::point, 1.0, 1.0, LimitTarget::Scaling::k_n};
    case Variant::II: {
      const double v = h_function(spec.c);
      return {LimitTarget::Kind::point, v, v, LimitTarget::Scaling::k_n};
    }
    case Variant::III:
      return {LimitTarget::Kind::interval, std::sqrt(spec.c), std::sqrt(1.0 + spec.c),
              LimitTarget::Scaling::k_n};
    case Variant::IV:
      return {LimitTarget::Kind::upper_bound, 2.0, 2.0, LimitTarget::Scaling::d_n};
  }
  return {};
}

double d_scaling(std::uint64_t n_spacings, double c_n) {
  if (n_spacings < 3) throw DomainError("d_scaling: N must be >= 3");
  if (!(c_n > 0.0 && c_n < 1.0)) throw DomainError("d_scaling: c_N must lie in (0,1)");
  const double n = static_cast<double>(n_spacings);
  return std::sqrt(n) / std::log(n) * std::log(1.0 / c_n);
}

}  // namespace kspacings
