#include "kspacings/gamma_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <vector>

#include "kspacings/errors.hpp"

namespace kspacings::gamma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSeriesCutoff = 1e-17;
constexpr double kSolverTolerance = 1e-13;
constexpr int kMaxSolverIterations = 200;

const std::vector<double>& log_factorial_table() {
  static std::once_flag once;
  static std::vector<double> table;
  std::call_once(once, [] {
    table.resize(std::size_t{kMaxOrder} + 1);
    table[0] = 0.0;
    // Neumaier compensated summation keeps the absolute error near one ulp of
    // the running total even at m = 10^6.
    double sum = 0.0;
    double comp = 0.0;
    for (std::uint32_t m = 1; m <= kMaxOrder; ++m) {
      const double term = std::log(static_cast<double>(m));
      const double t = sum + term;
      if (std::abs(sum) >= std::abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
      table[m] = sum + comp;
    }
  });
  return table;
}

void check_argument(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    std::ostringstream msg;
    msg << "gamma kernel: argument must be finite and nonnegative, got " << x;
    throw DomainError(msg.str());
  }
}

// log H_k(x) for 0 < x < k from the convergent lower series
// H_k(x) = e^{-x} x^k / k! * sum_{m>=0} x^m k! / (k+m)!.
double log_cdf_series(std::uint32_t k, double x) {
  const double log_lead = k * std::log(x) - x - log_factorial(k);
  double term = 1.0;
  double sum = 1.0;
  for (std::uint64_t m = 1;; ++m) {
    term *= x / (static_cast<double>(k) + static_cast<double>(m));
    sum += term;
    if (term < kSeriesCutoff * sum) break;
  }
  return log_lead + std::log(sum);
}

// log(1 - H_k(x)) for x >= k from the finite upper sum
// 1 - H_k(x) = x^{k-1} e^{-x} / (k-1)! * (1 + (k-1)/x + (k-1)(k-2)/x^2 + ...).
// The bracket is >= 1, so the result never falls below log_pdf.
double log_survival_sum(std::uint32_t k, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (std::uint32_t m = 1; m < k; ++m) {
    term *= static_cast<double>(k - m) / x;
    sum += term;
    if (term < kSeriesCutoff * sum) break;
  }
  return log_pdf(Order(k), x) + std::log(sum);
}

struct Eval {
  double value;
  double slope;
};

// Safeguarded Newton for an increasing function with f(0+) < 0. The iterate
// is kept inside the current bracket and falls back to bisection when a
// Newton step leaves it or fails to halve the residual.
template <class F>
double solve_increasing(F&& f, double x0, const char* what) {
  double lo = 0.0;
  double hi = std::max(1.0, x0) * 2.0;
  while (f(hi).value < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError(std::string(what) + ": could not bracket root");
  }
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxSolverIterations; ++iter) {
    const Eval e = f(x);
    const double residual = std::abs(e.value);
    if (residual <= kSolverTolerance) return x;
    if (e.value < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return x;
    double next = x - e.value / e.slope;
    if (!std::isfinite(next) || next <= lo || next >= hi || residual > 0.5 * previous) {
      next = 0.5 * (lo + hi);
    }
    previous = residual;
    x = next;
  }
  throw NumericError(std::string(what) + ": no convergence after 200 iterations");
}

}  // namespace

Order::Order(std::int64_t k) {
  if (k < 1 || k > static_cast<std::int64_t>(kMaxOrder)) {
    std::ostringstream msg;
    msg << "gamma order k must lie in [1, " << kMaxOrder << "], got " << k;
    throw DomainError(msg.str());
  }
  k_ = static_cast<std::uint32_t>(k);
}

double log_factorial(std::uint32_t m) {
  if (m > kMaxOrder) {
    throw DomainError("log_factorial: argument exceeds the cached range");
  }
  return log_factorial_table()[m];
}

double log_cdf(Order order, double x) {
  check_argument(x);
  if (x == 0.0) return kNegInf;
  const std::uint32_t k = order.k();
  if (x < k) return log_cdf_series(k, x);
  return std::log1p(-std::exp(log_survival_sum(k, x)));
}

double log_survival(Order order, double x) {
  check_argument(x);
  if (x == 0.0) return 0.0;
  const std::uint32_t k = order.k();
  if (x >= k) return log_survival_sum(k, x);
  return std::log1p(-std::exp(log_cdf_series(k, x)));
}

double cdf(Order order, double x) {
  check_argument(x);
  if (x == 0.0) return 0.0;
  const std::uint32_t k = order.k();
  if (x < k) return std::exp(log_cdf_series(k, x));
  return -std::expm1(log_survival_sum(k, x));
}

double survival(Order order, double x) {
  check_argument(x);
  if (x == 0.0) return 1.0;
  const std::uint32_t k = order.k();
  if (x >= k) return std::exp(log_survival_sum(k, x));
  return -std::expm1(log_cdf_series(k, x));
}

double log_pdf(Order order, double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    std::ostringstream msg;
    msg << "gamma pdf: argument must be finite and positive, got " << x;
    throw DomainError(msg.str());
  }
  const std::uint32_t k = order.k();
  const double power = (k == 1) ? 0.0 : (k - 1.0) * std::log(x);
  return power - x - log_factorial(k - 1);
}

double pdf(Order order, double x) { return std::exp(log_pdf(order, x)); }

double lower_quantile_log(Order order, double log_s) {
  if (!(log_s < 0.0) || !std::isfinite(log_s)) {
    throw DomainError("lower_quantile_log: log probability must be finite and negative");
  }
  const std::uint32_t k = order.k();
  const double x0 = std::exp((log_s + log_factorial(k)) / k);
  if (x0 < std::numeric_limits<double>::min()) {
    throw NumericError("gamma lower quantile: result underflows double precision");
  }
  return solve_increasing(
      [&](double x) {
        const double lc = log_cdf(order, x);
        return Eval{lc - log_s, std::exp(log_pdf(order, x) - lc)};
      },
      x0, "gamma lower quantile");
}

double upper_quantile_log(Order order, double log_q) {
  if (!(log_q < 0.0) || !std::isfinite(log_q)) {
    throw DomainError("upper_quantile_log: log probability must be finite and negative");
  }
  const std::uint32_t k = order.k();
  const double level = -log_q;
  double x0 = static_cast<double>(k);
  if (level > 1.0) {
    x0 = std::max(x0, level + (k - 1.0) * std::log(level) - log_factorial(k - 1));
  }
  return solve_increasing(
      [&](double x) {
        const double ls = log_survival(order, x);
        return Eval{log_q - ls, std::exp(log_pdf(order, x) - ls)};
      },
      x0, "gamma upper quantile");
}

double quantile(Order order, double s) {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream msg;
    msg << "gamma quantile: probability must lie in (0,1), got " << s;
    throw DomainError(msg.str());
  }
  if (s <= 0.5) return lower_quantile_log(order, std::log(s));
  // 1 - s is exact for s in [0.5, 1].
  return upper_quantile_log(order, std::log(1.0 - s));
}

TailBounds tail_bounds(Order order, double x) {
  if (!std::isfinite(x) || !(x > order.k())) {
    std::ostringstream msg;
    msg << "tail_bounds: requires x > k = " << order.k() << ", got " << x;
    throw DomainError(msg.str());
  }
  const double log_lower = log_pdf(order, x);
  const double log_upper = log_lower - std::log1p(-static_cast<double>(order.k()) / x);
  return {std::exp(log_lower), std::exp(log_upper), log_lower, log_upper};
}

std::optional<double> TailThreshold::value() const {
  if (log_value > -745.0) return std::exp(log_value);
  return std::nullopt;
}

TailThreshold tail_threshold(std::int64_t k, double delta) {
  if (k < 1) throw DomainError("tail_threshold: k must be positive");
  if (!std::isfinite(delta) || !(delta > 2.0)) {
    throw DomainError("tail_threshold: delta must exceed 2");
  }
  const double kd = static_cast<double>(k);
  const double log_value = kd * (delta - 2.0) * std::log(kd) - 0.5 * std::pow(kd, delta);
  return {static_cast<std::uint32_t>(k), delta, log_value};
}

TailApprox quantile_tail_approx_log(Order order, double log_s, double delta) {
  const TailThreshold threshold = tail_threshold(order.k(), delta);
  if (!std::isfinite(log_s) || log_s > threshold.log_value) {
    std::ostringstream msg;
    msg << "quantile_tail_approx: log s = " << log_s << " exceeds log t_k(delta) = "
        << threshold.log_value << " (k=" << order.k() << ", delta=" << delta << ")";
    throw PreconditionError(msg.str());
  }
  const double exact = upper_quantile_log(order, log_s);
  const double approx = -log_s;
  return {approx, exact, std::abs(exact / approx - 1.0)};
}

TailApprox quantile_tail_approx(Order order, double s, double delta) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("quantile_tail_approx: s must lie in (0,1)");
  return quantile_tail_approx_log(order, std::log(s), delta);
}

}  // namespace kspacings::gamma
