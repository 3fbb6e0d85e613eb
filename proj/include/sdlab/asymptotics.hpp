#pragma once

#include <functional>
#include <vector>

#include "sdlab/density.hpp"
#include "sdlab/gfunc.hpp"

namespace sdlab {

struct LaplaceResult {
  double value;
  double peak_value;  // h(0)
  double curvature;   // h''(0), finite-difference estimate
};

// Peak-expansion approximation of integral u(z) exp(a h(z)) dz for a peak at
// z = 0. h must have a strict negative-curvature maximum there; flat or
// unstable curvature estimates raise NumericError rather than returning a
// silently wrong value. step_hint overrides the automatic stencil step.
LaplaceResult laplace_approx(const std::function<double(double)>& u,
                             const std::function<double(double)>& h, double a,
                             double step_hint = 0.0);

// Expectation of the observable against the exact price-change density. The
// exact law has power-law tails, so only bounded observables have moments; a
// far-field probe (|y| up to 1e9, cap 1e6) rejects unbounded ones up front.
double expectation_f3(const std::function<double(double)>& observable, const GFunction& g,
                      const NoiseParams& params, double abs_tol = 1e-9);

// Expectation against the Gaussian surrogate. Accepts any continuous
// observable of at most polynomial growth; a zero-width surrogate (vanishing
// response slope) reduces to the observable at the mode.
double expectation_f3n(const std::function<double(double)>& observable, const GFunction& g,
                       const NoiseParams& params, double abs_tol = 1e-9);

struct ExpectationComparison {
  double exact;     // E[R] under the exact per-step density
  double gaussian;  // E[R] under the Gaussian surrogate
  double abs_error;
};

// Bounded observables only, same far-field probe as expectation_f3.
ExpectationComparison expectation_error(const std::function<double(double)>& observable,
                                        const GFunction& g, const NoiseParams& params,
                                        double abs_tol = 1e-9);

struct ConvergencePoint {
  double sigma;
  double dt;
  double abs_error;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  double fitted_order;  // least-squares slope of log error vs log sigma
  bool alpha_scaled;
  bool degenerate;  // errors at the noise floor; fitted_order not meaningful
};

// Measures the surrogate expectation error across a ladder of sigma values.
// Requires at least 4 values spanning a factor >= 8. With alpha_scaling the
// step size co-varies as dt_i = base.dt * (sigma_i / sigma_max).
ConvergenceResult convergence_experiment(const std::function<double(double)>& observable,
                                         const GFunction& g, const NoiseParams& base,
                                         const std::vector<double>& sigmas, bool alpha_scaling,
                                         double abs_tol = 1e-9);

struct CollapseReport {
  double x_lo;  // overlapping range in sigma^2 / dt
  double x_hi;
  double ratio_lo;  // predicted-error ratio at each end of the overlap
  double ratio_hi;
  bool comparable;
  bool pass;  // both ratios within a factor 2
};

// Checks that two convergence runs (plain and alpha-scaled) trace the same
// power law when errors are plotted against sigma^2 / dt.
CollapseReport check_alpha_collapse(const ConvergenceResult& plain,
                                    const ConvergenceResult& scaled);

struct CurvatureCheck {
  double lhs;  // sigma^2 dt * E''(y0)
  double rhs;  // -1 / (r G'(r))^2
  double abs_diff;
};

// Verifies the curvature identity tying the log-density exponent at the mode
// to the surrogate variance.
CurvatureCheck verify_h1_curvature(const GFunction& g, const NoiseParams& params);

}  // namespace sdlab
