#include "sdlab/gfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdlab/errors.hpp"

namespace sdlab {

namespace {

void require_positive(double x, const char* op) {
  if (!(x > 0.0)) throw std::invalid_argument(std::string(op) + ": domain error: x must be > 0");
}

bool is_odd_positive_integer(double q) {
  if (!(q > 0.0) || q != std::floor(q)) return false;
  return std::fmod(q, 2.0) == 1.0;
}

// u^p for odd integer p, defined for all real u with the sign carried exactly
double odd_pow(double u, double p) { return std::copysign(std::pow(std::fabs(u), p), u); }

}  // namespace

GFunction::GFunction(GFamily family, double q) : family_(family), q_(q) {
  if (!std::isfinite(q)) throw std::invalid_argument("gfunc: q must be finite");
  if (family == GFamily::power_diff) {
    if (!(q > 0.0)) throw std::invalid_argument("gfunc: power_diff requires q > 0");
  } else {
    if (!is_odd_positive_integer(q))
      throw std::invalid_argument("gfunc: odd_power_diff requires q in {1, 3, 5, ...}");
  }
}

double GFunction::value(double x) const {
  require_positive(x, "gfunc.g_eval");
  if (family_ == GFamily::power_diff) return std::pow(x, q_) - std::pow(x, -q_);
  return odd_pow(x - 1.0 / x, q_);
}

double GFunction::prime(double x) const {
  require_positive(x, "gfunc.g_prime");
  if (family_ == GFamily::power_diff)
    return q_ * (std::pow(x, q_ - 1.0) + std::pow(x, -q_ - 1.0));
  const double u = x - 1.0 / x;
  // q odd, so q-1 is even and |u|^(q-1) carries no sign
  return q_ * std::pow(std::fabs(u), q_ - 1.0) * (1.0 + 1.0 / (x * x));
}

double GFunction::second(double x) const {
  require_positive(x, "gfunc.g_second");
  if (family_ == GFamily::power_diff)
    return q_ * (q_ - 1.0) * std::pow(x, q_ - 2.0) - q_ * (q_ + 1.0) * std::pow(x, -q_ - 2.0);
  const double x2 = x * x;
  const double upp = -2.0 / (x2 * x);
  if (q_ == 1.0) return upp;
  const double u = x - 1.0 / x;
  const double up = 1.0 + 1.0 / x2;
  return q_ * (q_ - 1.0) * odd_pow(u, q_ - 2.0) * up * up +
         q_ * std::pow(std::fabs(u), q_ - 1.0) * upp;
}

double GFunction::inverse(double y, double tol) const {
  if (!(tol > 0.0)) throw std::invalid_argument("gfunc.g_inverse: tol must be > 0");
  if (!std::isfinite(y)) throw std::invalid_argument("gfunc.g_inverse: y must be finite");
  if (y == 0.0) return 1.0;
  // Both families satisfy G(1/x) = -G(x) exactly, so the negative branch
  // reduces to the positive one. The solver then only ever brackets roots at
  // or above 1, where a width cutoff relative to the bracket is meaningful;
  // solving the negative branch directly leaves a root that can be hundreds
  // of orders of magnitude below the bracket width.
  if (y < 0.0) return 1.0 / inverse(-y, tol);

  double hi = 1.0;
  constexpr int expand_cap = 1100;
  int i = 0;
  while (value(hi) < y) {
    if (hi > std::numeric_limits<double>::max() / 2.0) {
      hi = std::numeric_limits<double>::max();
      if (value(hi) < y) throw NumericError("gfunc.g_inverse: root not representable");
      break;
    }
    hi *= 2.0;
    if (++i > expand_cap) throw NumericError("gfunc.g_inverse: bracket expansion failed");
  }

  double a = std::max(1.0, 0.5 * hi), b = hi;
  double fa = value(a) - y, fb = value(b) - y;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;

  // Residual-based acceptance is unusable here: where G' vanishes (the odd
  // family near x = 1) a tiny residual still allows an argument error that
  // swamps the jacobian of every density built on this inverse. Convergence
  // is therefore judged on the bracket width alone, with tol acting as a
  // relative width target.
  const double width_tol = std::min(tol, 0.25);
  constexpr int iter_cap = 400;
  int kept = 0;  // +1 when b survived the last update, -1 when a did
  for (int it = 0; it < iter_cap; ++it) {
    // false-position proposal with the Illinois weight halving: a retained
    // endpoint has its stored residual cut so the bracket cannot stagnate on
    // one side (the plain rule crawls on flat stretches of the odd family)
    double x = (a * fb - b * fa) / (fb - fa);
    if (!std::isfinite(x) || x <= a || x >= b) {
      x = 0.5 * (a + b);
      if (x <= a || x >= b) {
        // bracket is one ulp wide; pick the endpoint with the smaller residual
        return std::fabs(fa) <= std::fabs(fb) ? a : b;
      }
    }
    const double fx = value(x) - y;
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      a = x;
      fa = fx;
      if (kept == 1) fb *= 0.5;
      kept = 1;
    } else {
      b = x;
      fb = fx;
      if (kept == -1) fa *= 0.5;
      kept = -1;
    }
    if (b - a <= width_tol * b) return 0.5 * (a + b);
  }
  throw NumericError("gfunc.g_inverse: iteration cap exceeded (pathological tol?)");
}

bool ConditionGReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
}

double ConditionGReport::max_violation() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.max_violation);
  return m;
}

ConditionGReport check_condition_g(const GFunction& g, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("gfunc.check_condition_g: empty grid");
  for (double x : grid) require_positive(x, "gfunc.check_condition_g");
  std::vector<double> xs = grid;
  std::sort(xs.begin(), xs.end());

  ConditionGReport rep;

  {
    AxiomCheck c{"value_at_one_is_zero", false, std::fabs(g.value(1.0))};
    c.pass = c.max_violation <= 1e-12;
    rep.checks.push_back(c);
  }
  {
    AxiomCheck c{"derivative_positive", true, 0.0};
    for (double x : xs) {
      const double gp = g.prime(x);
      if (!(gp > 0.0)) {
        c.pass = false;
        c.max_violation = std::max(c.max_violation, std::fabs(gp) + 1.0);
      }
    }
    rep.checks.push_back(c);
  }
  {
    AxiomCheck c{"antisymmetry", true, 0.0};
    for (double x : xs) {
      const double v = std::fabs(g.value(x) + g.value(1.0 / x)) / (1.0 + std::fabs(g.value(x)));
      c.max_violation = std::max(c.max_violation, v);
    }
    c.pass = c.max_violation <= 1e-12;
    rep.checks.push_back(c);
  }
  {
    AxiomCheck c{"derivative_identity", true, 0.0};
    for (double x : xs) {
      const double lhs = x * g.prime(x);
      const double rhs = (1.0 / x) * g.prime(1.0 / x);
      const double v = std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs));
      c.max_violation = std::max(c.max_violation, v);
    }
    c.pass = c.max_violation <= 1e-10;
    rep.checks.push_back(c);
  }
  {
    // (x G'(x))' < 0 for x < 1 and > 0 for x > 1, by central differences
    AxiomCheck c{"flow_derivative_sign", true, 0.0};
    for (double x : xs) {
      if (std::fabs(x - 1.0) <= 1e-9) continue;  // switch point, derivative -> 0
      const double h = 1e-5 * x;
      const double d = ((x + h) * g.prime(x + h) - (x - h) * g.prime(x - h)) / (2.0 * h);
      const bool ok = x < 1.0 ? d < 0.0 : d > 0.0;
      if (!ok) {
        c.pass = false;
        c.max_violation = std::max(c.max_violation, std::fabs(d) + 1.0);
      }
    }
    rep.checks.push_back(c);
  }
  {
    // growth toward both ends: x G'(x) decreasing on (0,1), increasing on (1,inf)
    AxiomCheck c{"growth_toward_ends", true, 0.0};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double x0 = xs[i], x1 = xs[i + 1];
      const double p0 = x0 * g.prime(x0), p1 = x1 * g.prime(x1);
      double breach = 0.0;
      if (x1 < 1.0) breach = (p1 - p0) / (1.0 + std::fabs(p0));  // must not increase
      if (x0 > 1.0) breach = (p0 - p1) / (1.0 + std::fabs(p0));  // must not decrease
      c.max_violation = std::max(c.max_violation, breach);
    }
    c.pass = c.max_violation <= 1e-12;
    rep.checks.push_back(c);
  }
  return rep;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2)
    throw std::invalid_argument("gfunc.log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1.0));
  return xs;
}

const char* to_string(GFamily f) {
  return f == GFamily::power_diff ? "power_diff" : "odd_power_diff";
}

GFamily g_family_from_string(const std::string& s) {
  if (s == "power_diff") return GFamily::power_diff;
  if (s == "odd_power_diff") return GFamily::odd_power_diff;
  throw std::invalid_argument("gfunc: unknown family '" + s + "'");
}

}  // namespace sdlab
