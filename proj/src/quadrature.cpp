#include "sdlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "sdlab/errors.hpp"

namespace sdlab {
namespace quad {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (positive half)
constexpr double kXgk[8] = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
constexpr double kWgk[8] = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
constexpr double kWg[4] = {0.12948496616886969327, 0.27970539148927666790,
                           0.38183005050511894495, 0.41795918367346938776};

struct Segment {
  double a, b, integral, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kron = kWgk[7] * f(c);
  double gauss = kWg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double fl = f(c - h * kXgk[i]);
    const double fr = f(c + h * kXgk[i]);
    kron += kWgk[i] * (fl + fr);
    if (i % 2 == 1) gauss += kWg[i / 2] * (fl + fr);
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::fabs(kron - gauss)};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("quadrature: abs_tol must be > 0");
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  if (sign < 0.0) std::swap(a, b);

  std::priority_queue<Segment> heap;
  Segment s0 = gk15(f, a, b);
  double total = s0.integral;
  double err = s0.error;
  heap.push(s0);

  constexpr int max_segments = 4000;
  int n = 1;
  while (err > abs_tol && !heap.empty()) {
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    // refuse to split below the resolution of the abscissa
    if (mid - worst.a < 16.0 * std::numeric_limits<double>::epsilon() *
                            (std::fabs(mid) + 1.0)) {
      err -= worst.error;  // accept as converged at roundoff floor
      total += 0.0;
      continue;
    }
    const Segment l = gk15(f, worst.a, mid);
    const Segment r = gk15(f, mid, worst.b);
    total += l.integral + r.integral - worst.integral;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    if (++n > max_segments)
      throw NumericError("quadrature.integrate: failed to reach tolerance");
  }
  return sign * total;
}

double integrate_upper_tail(const std::function<double(double)>& f, double a, double abs_tol) {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("quadrature: abs_tol must be > 0");
  constexpr double half_pi = 1.5707963267948966;
  constexpr double t_max = 6.5;
  constexpr int level_cap = 9;

  const auto term = [&](double t) -> double {
    const double s = half_pi * std::sinh(t);
    if (s > 690.0) return 0.0;  // x would overflow; integrand treated as dead
    const double u = std::exp(s);
    const double x = a + u;
    const double jac = half_pi * std::cosh(t) * u;
    if (jac == 0.0) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * jac;
  };

  // trapezoid sums S(h) = sum_k g(k h); refined levels reuse previous points.
  // Early exit on a run of negligible terms is only safe beyond the largest
  // |t| where any level has seen mass: the scan starts at t = 0, which can sit
  // in a dead valley in front of the bump.
  const double dead_tol = abs_tol * 1e-4;
  double alive_extent[2] = {0.0, 0.0};
  const auto note = [&](int side_idx, double t_abs, double v) {
    if (std::fabs(v) >= dead_tol && t_abs > alive_extent[side_idx]) {
      alive_extent[side_idx] = t_abs;
    }
  };

  double h = 0.5;
  double sum = term(0.0);
  for (int side = -1; side <= 1; side += 2) {
    for (int k = 1; k * h <= t_max; ++k) {
      const double t_abs = k * h;
      const double v = term(side * t_abs);
      sum += v;
      note(side < 0 ? 0 : 1, t_abs, v);
    }
  }
  double prev = sum * h;
  for (int level = 0; level < level_cap; ++level) {
    const double h2 = 0.5 * h;
    double odd = 0.0;
    for (int side = -1; side <= 1; side += 2) {
      const int si = side < 0 ? 0 : 1;
      const double stop_beyond = alive_extent[si] + 0.5;
      int dead = 0;
      for (int k = 0; (2 * k + 1) * h2 <= t_max; ++k) {
        const double t_abs = (2 * k + 1) * h2;
        const double v = term(side * t_abs);
        odd += v;
        note(si, t_abs, v);
        if (std::fabs(v) < dead_tol) {
          if (++dead >= 4 && t_abs > stop_beyond) break;
        } else {
          dead = 0;
        }
      }
    }
    sum += odd;
    const double cur = sum * h2;
    if (std::fabs(cur - prev) <= std::max(abs_tol, 1e-15 * std::fabs(cur)) && level >= 2)
      return cur;
    prev = cur;
    h = h2;
  }
  throw NumericError("quadrature.integrate_upper_tail: failed to reach tolerance");
}

double integrate_lower_tail(const std::function<double(double)>& f, double a, double abs_tol) {
  return integrate_upper_tail([&f, a](double x) { return f(2.0 * a - x); }, a, abs_tol);
}

double integrate_line(const std::function<double(double)>& f, double center, double half_width,
                      double abs_tol) {
  return integrate_line_split(f, center, half_width, abs_tol, {});
}

double integrate_line_split(const std::function<double(double)>& f, double center,
                            double half_width, double abs_tol,
                            const std::vector<double>& interior_splits) {
  if (!(half_width > 0.0)) throw std::invalid_argument("quadrature: half_width must be > 0");
  const double a = center - half_width;
  const double b = center + half_width;
  std::vector<double> cuts{a};
  for (double s : interior_splits) {
    if (s > a && s < b) cuts.push_back(s);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  const double seg_tol = 0.5 * abs_tol / static_cast<double>(cuts.size() - 1);
  double core = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    core += integrate(f, cuts[i], cuts[i + 1], seg_tol);
  }
  const double up = integrate_upper_tail(f, b, 0.25 * abs_tol);
  const double lo = integrate_lower_tail(f, a, 0.25 * abs_tol);
  return core + up + lo;
}

}  // namespace quad
}  // namespace sdlab
