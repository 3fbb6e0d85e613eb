#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/gfunc.hpp"
#include "sdlab/sde.hpp"

namespace sdlab {

enum class VolatilityMode { vp, vpn, vlog };

std::string to_string(VolatilityMode mode);
VolatilityMode volatility_mode_from_string(const std::string& name);

// Windowed estimator setup: window grid points per window, starts spaced by
// stride. Population variance by default; bessel switches to the K-1 divisor.
struct VolatilityConfig {
  std::size_t window;
  std::size_t stride;
  VolatilityMode mode = VolatilityMode::vlog;
  bool bessel = false;

  VolatilityConfig(std::size_t window_, std::size_t stride_, VolatilityMode mode_,
                   bool bessel_ = false);
};

struct VolatilitySeries {
  std::vector<double> centers;
  std::vector<double> estimates;
  std::vector<double> theory;  // empty until a scenario is attached
  VolatilityMode mode = VolatilityMode::vlog;
  std::size_t window_points = 0;    // increments per window
  std::size_t dropped_windows = 0;  // started but incomplete at the path end
  bool overlapping = false;         // stride < window: estimates serially correlated
};

// Per-window variance of the K price (or log-price) increments divided by the
// grid spacing; vpn additionally divides by the squared within-window mean
// price. Needs at least window+1 path points.
VolatilitySeries estimate_volatility(const PricePath& path, const VolatilityConfig& cfg);

// Pointwise average of the per-path window estimates across an ensemble.
VolatilitySeries estimate_volatility_ensemble(const PathEnsemble& ensemble,
                                              const VolatilityConfig& cfg);
VolatilitySeries estimate_volatility_ensemble_serial(const PathEnsemble& ensemble,
                                                     const VolatilityConfig& cfg);

// Marginal-volatility formula evaluated at time t. vlog depends only on the
// demand/supply ratio; vp scales by the squared price, taken from price_hint
// or the deterministic (sigma = 0) path; vpn uses that same deterministic
// price as the E[P] proxy, so its theory value coincides with vlog.
double theoretical_volatility(const MarketScenario& scenario, const GFunction& g, double t,
                              VolatilityMode mode, double price_hint = 0.0);

// Fills series.theory at every window center.
void attach_theory(VolatilitySeries* series, const MarketScenario& scenario, const GFunction& g);

// Ensemble-variance of the whole-window price change over K times the mean
// within-window increment variance, averaged across windows; near 1 when the
// window-additivity approximation holds.
double window_additivity_ratio(const PathEnsemble& ensemble, const VolatilityConfig& cfg);

struct ExtremaReport {
  std::vector<double> price_extrema_times;  // interior extrema of the smoothed mean price
  std::vector<double> vol_min_times;        // prominence-filtered volatility minima
  std::vector<double> vol_max_times;
  double max_move_time = 0.0;   // window with the largest |relative price change|
  double vol_peak_time = 0.0;   // window with the largest volatility estimate
  std::vector<double> price_to_volmin_offsets;  // per price extremum, nearest vol minimum
  double move_to_volmax_offset = 0.0;
  double rank_correlation = 0.0;  // windowed |dlog P| vs volatility estimate
  bool no_interior_extrema = false;
};

ExtremaReport extrema_report(const PathEnsemble& ensemble, const VolatilitySeries& series);

// Strict `t,price` reader: uniform strictly-increasing grid, positive prices.
// Errors carry the offending data row number.
PricePath ingest_prices(const std::string& file_path);

// CSV `t_center,estimate,theory`; the theory column is blank when absent.
void write_volatility_csv(const VolatilitySeries& series, const std::string& path);

}  // namespace sdlab
