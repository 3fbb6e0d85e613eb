#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdlab/gfunc.hpp"

namespace sdlab {

enum class SignalKind { constant, sinusoid, piecewise, csv };

// Deterministic time signal for demand or supply levels. piecewise holds the
// knot value until the next knot (step function); csv interpolates the table
// linearly and clamps outside its range.
class Signal {
 public:
  static Signal constant(double value);
  static Signal sinusoid(double mean, double amplitude, double period);
  static Signal piecewise(std::vector<std::pair<double, double>> knots);
  static Signal from_table(std::vector<std::pair<double, double>> table);
  static Signal from_csv(const std::string& path);

  double operator()(double t) const;
  SignalKind kind() const { return kind_; }

 private:
  Signal(SignalKind kind, std::vector<std::pair<double, double>> knots, double mean,
         double amplitude, double period);

  SignalKind kind_;
  std::vector<std::pair<double, double>> knots_;
  double mean_;
  double amplitude_;
  double period_;
};

// Simulation horizon plus the exogenous market drivers. Construction scans
// both signals on a 1000-point grid and rejects non-positive values; sigma
// may be 0 (deterministic dynamics), all other positivity rules are strict.
struct MarketScenario {
  Signal demand;
  Signal supply;
  double sigma;
  double t0;
  double t_end;
  double dt_step;
  double p0;

  MarketScenario(Signal demand_, Signal supply_, double sigma_, double t0_, double t_end_,
                 double dt_step_, double p0_);

  double ratio(double t) const { return demand(t) / supply(t); }
  std::size_t n_steps() const;
};

enum class Scheme { euler_p, euler_logp, sym_p, discrete_tatonnement, ingested };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct PricePath {
  std::vector<double> times;
  std::vector<double> prices;
  std::vector<double> log_prices;
  Scheme scheme = Scheme::euler_logp;
  std::uint64_t seed = 0;
};

// Euler-Maruyama on the chosen formulation. euler_p steps the price itself,
// euler_logp steps the log price (positive by construction), sym_p uses the
// symmetrized drift/diffusion coefficients, which match euler_p step by step.
// Brownian increments depend only on (seed, step), so schemes share noise.
// euler_p aborts with the step index if the price leaves the positive axis.
PricePath simulate_path(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                        std::uint64_t seed);

struct PathEnsemble {
  std::vector<double> times;
  std::vector<std::vector<double>> prices;  // one inner vector per path
  Scheme scheme = Scheme::euler_logp;
  std::uint64_t seed = 0;
};

// n_paths independent paths; path k draws from substream k of the seed, so
// the ensemble is reproducible under any thread count.
PathEnsemble simulate_ensemble(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                               std::uint64_t seed, std::size_t n_paths);
PathEnsemble simulate_ensemble_serial(const MarketScenario& scenario, const GFunction& g,
                                      Scheme scheme, std::uint64_t seed, std::size_t n_paths);

// Deterministic (sigma = 0) price at each grid point, used as the E[P] proxy.
std::vector<double> deterministic_path(const MarketScenario& scenario, const GFunction& g);

enum class TatonnementVariant { raw, normalized, nonlinear };

// Iterates the discrete excess-demand recursion. raw adds (d - s)/tau0 to the
// price level and throws if the price leaves the positive axis; normalized
// uses the relative excess demand (d - s)/s; nonlinear pushes d/s through g.
std::vector<double> discrete_tatonnement(double p0, const std::vector<double>& d,
                                         const std::vector<double>& s, double tau0,
                                         TatonnementVariant variant,
                                         const GFunction* g = nullptr);

// Affine market curves quantity = intercept + slope * price; demand slopes
// down, supply slopes up, and the curves must cross at a positive price.
struct SupplyDemandCurves {
  double demand_intercept;
  double demand_slope;
  double supply_intercept;
  double supply_slope;

  SupplyDemandCurves(double demand_intercept_, double demand_slope_, double supply_intercept_,
                     double supply_slope_);
};

double intersect_curves(const SupplyDemandCurves& curves);

// CSV export `t,price`; the ensemble variant writes the pointwise mean path.
void write_path_csv(const PricePath& path, const std::string& path_name);
void write_ensemble_mean_csv(const PathEnsemble& ensemble, const std::string& path_name);

}  // namespace sdlab
