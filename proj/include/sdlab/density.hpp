#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sdlab/gfunc.hpp"

namespace sdlab {

// Noise and imbalance parameters shared by every density in the chain.
// sigma, dt, d_over_s must all be strictly positive; sigma == 0 is rejected
// here rather than propagated as a degenerate (delta) distribution.
struct NoiseParams {
  double sigma;
  double dt;
  double d_over_s;

  NoiseParams(double sigma_, double dt_, double d_over_s_);

  // half-width parameter of the ratio noise: sigma / (2 sqrt(dt))
  double a() const;
};

enum class DensityKind { fx, fx1, f2, f3, f3n };

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

// Density of the raw noise ratio (1 + aY)/(1 - aY). Defined for all real x;
// the removable point x = -1 evaluates to 0 by convention.
double fx_density(const NoiseParams& params, double x);

// Density of the scaled ratio r * X with r = d_over_s; fx1_density(-r) := 0.
double fx1_density(const NoiseParams& params, double x);

// Density of G applied to the scaled ratio (per unit time).
double f2_density(const GFunction& g, const NoiseParams& params, double y);

// Density of the price change over one step of length dt.
double f3_density(const GFunction& g, const NoiseParams& params, double y);

// Gaussian surrogate sharing the mode location and local curvature of f3.
double f3n_density(const GFunction& g, const NoiseParams& params, double y);

// Mode / mean and standard deviation of the Gaussian surrogate.
double f3_mode(const GFunction& g, const NoiseParams& params);
double f3n_std(const GFunction& g, const NoiseParams& params);

// Log-density exponent E(y) of f3 (the argument of its exponential factor).
double f3_exponent(const GFunction& g, const NoiseParams& params, double y);

struct TailRatio {
  double value;
  bool overflow;  // Gaussian factor underflowed; value is not meaningful
};

// f3(y) / f3n(y) with explicit overflow signalling in the far tails.
TailRatio tail_ratio(const GFunction& g, const NoiseParams& params, double y);

// Normalization integral of the chosen density (g may be null for fx / fx1).
double density_mass(const GFunction* g, const NoiseParams& params, DensityKind kind,
                    double abs_tol = 1e-9);

// Integral of weight(y) * density(y) over the full line (central window plus
// both tails). Supports f2 and f3, including the odd-family pole at y = 0.
double weighted_density_integral(const GFunction& g, const NoiseParams& params,
                                 DensityKind kind,
                                 const std::function<double(double)>& weight,
                                 double abs_tol = 1e-9);

// Default plotting window: distribution center +/- n_std local spreads.
std::pair<double, double> default_range(const GFunction* g, const NoiseParams& params,
                                        DensityKind kind, double n_std = 8.0);

struct DensityCurve {
  DensityKind which;
  NoiseParams params;
  bool has_g;
  GFamily family;
  double q;
  std::vector<double> ys;
  std::vector<double> fs;
};

// Evaluates the chosen density on a uniform grid of n points over
// [y_min, y_max]. g may be null only for fx / fx1. The parallel version
// partitions the grid across threads; the serial one is the reference.
DensityCurve tabulate(const GFunction* g, const NoiseParams& params, DensityKind kind,
                      double y_min, double y_max, int n);
DensityCurve tabulate_serial(const GFunction* g, const NoiseParams& params, DensityKind kind,
                             double y_min, double y_max, int n);

// CSV with header "y,f" plus a JSON sidecar describing the parameters.
void write_curve_csv(const DensityCurve& curve, const std::string& path);
void write_curve_sidecar(const DensityCurve& curve, const std::string& path);

}  // namespace sdlab
