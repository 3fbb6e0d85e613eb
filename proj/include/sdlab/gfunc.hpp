#pragma once

#include <string>
#include <vector>

namespace sdlab {

enum class GFamily { power_diff, odd_power_diff };

// Price-response function families
//   power_diff:      G(x) = x^q - x^(-q),   q > 0 real
//   odd_power_diff:  G(x) = (x - 1/x)^q,    q an odd positive integer
// Both are strictly increasing bijections of (0, inf) onto the real line with
// G(1) = 0, G(x) = -G(1/x) and x G'(x) = (1/x) G'(1/x).
class GFunction {
 public:
  GFunction(GFamily family, double q);

  double value(double x) const;
  double prime(double x) const;   // analytic first derivative, > 0
  double second(double x) const;  // analytic second derivative

  // Monotone inverse: brackets the root and converges its argument to a
  // relative width of tol. Residuals follow through the local slope, which
  // can be arbitrarily small for the odd family near x = 1.
  // Brackets [x_lo, x_hi] from [1, 1] by geometric expansion (x2 / /2) until
  // the sign changes, then refines with safeguarded bisection/secant steps.
  double inverse(double y, double tol = 1e-14) const;

  GFamily family() const { return family_; }
  double q() const { return q_; }

 private:
  GFamily family_;
  double q_;
};

struct AxiomCheck {
  std::string name;
  bool pass = false;
  double max_violation = 0.0;  // normalized residual, or 0 for pure sign checks
};

struct ConditionGReport {
  std::vector<AxiomCheck> checks;
  bool all_pass() const;
  double max_violation() const;
};

// Verifies, on the supplied grid of positive abscissae:
//   value at 1 is zero; positivity of the derivative; antisymmetry under
//   x -> 1/x; the derivative identity x G'(x) = (1/x) G'(1/x); the sign
//   pattern of (x G'(x))' about x = 1; and monotone growth of x G'(x)
//   toward both ends of the domain.
ConditionGReport check_condition_g(const GFunction& g, const std::vector<double>& grid);

// n log-spaced points over [lo, hi]
std::vector<double> log_grid(double lo, double hi, int n);

const char* to_string(GFamily f);
GFamily g_family_from_string(const std::string& s);

}  // namespace sdlab
