#pragma once

#include <functional>
#include <vector>

namespace sdlab {
namespace quad {

// Globally adaptive Gauss-Kronrod (7,15) integration of f over finite [a, b]
// to the given absolute tolerance. Throws NumericError on non-convergence.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol);

// Integral of f over [a, +inf) via the double-exponential substitution
// x = a + exp((pi/2) sinh t), trapezoid in t with step halving. The
// substitution soaks up power-law tails that defeat naive truncation.
double integrate_upper_tail(const std::function<double(double)>& f, double a, double abs_tol);

// Integral of f over (-inf, a], by reflection of the upper-tail rule.
double integrate_lower_tail(const std::function<double(double)>& f, double a, double abs_tol);

// Full-line integral structured for peaked integrands: adaptive core on
// [center - half_width, center + half_width] plus substituted tails.
double integrate_line(const std::function<double(double)>& f, double center, double half_width,
                      double abs_tol);

// As above, but the core is additionally cut at the given interior points so
// an integrable singularity lands on segment endpoints, which the
// Gauss-Kronrod nodes never evaluate. Splits outside the core are ignored.
double integrate_line_split(const std::function<double(double)>& f, double center,
                            double half_width, double abs_tol,
                            const std::vector<double>& interior_splits);

}  // namespace quad
}  // namespace sdlab
