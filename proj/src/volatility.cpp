#include "sdlab/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdlab/csv.hpp"
#include "sdlab/errors.hpp"

namespace sdlab {

std::string to_string(VolatilityMode mode) {
  switch (mode) {
    case VolatilityMode::vp: return "vp";
    case VolatilityMode::vpn: return "vpn";
    case VolatilityMode::vlog: return "vlog";
  }
  throw std::logic_error("volatility.mode: unreachable");
}

VolatilityMode volatility_mode_from_string(const std::string& name) {
  if (name == "vp") return VolatilityMode::vp;
  if (name == "vpn") return VolatilityMode::vpn;
  if (name == "vlog") return VolatilityMode::vlog;
  throw std::invalid_argument("volatility.mode: unknown mode '" + name + "'");
}

VolatilityConfig::VolatilityConfig(std::size_t window_, std::size_t stride_,
                                   VolatilityMode mode_, bool bessel_)
    : window(window_), stride(stride_), mode(mode_), bessel(bessel_) {
  if (window < 2) {
    throw std::invalid_argument("volatility.config: window must be >= 2");
  }
  if (stride < 1) {
    throw std::invalid_argument("volatility.config: stride must be >= 1");
  }
}

namespace {

struct WindowLayout {
  std::vector<std::size_t> starts;
  std::size_t dropped;
};

WindowLayout layout_windows(std::size_t n_increments, const VolatilityConfig& cfg) {
  WindowLayout layout{{}, 0};
  for (std::size_t start = 0;; start += cfg.stride) {
    if (start + cfg.window <= n_increments) {
      layout.starts.push_back(start);
    } else {
      if (start < n_increments) ++layout.dropped;
      break;
    }
  }
  return layout;
}

// Window starting at grid index start: increments are differences of points
// start..start+K; the vpn price mean runs over the first K window points.
double window_estimate(const std::vector<double>& prices, std::size_t start,
                       const VolatilityConfig& cfg, double dt) {
  const std::size_t k = cfg.window;
  double sum = 0.0;
  double sum_sq = 0.0;
  const bool log_mode = cfg.mode == VolatilityMode::vlog;
  for (std::size_t j = 1; j <= k; ++j) {
    const double inc = log_mode
                           ? std::log(prices[start + j]) - std::log(prices[start + j - 1])
                           : prices[start + j] - prices[start + j - 1];
    sum += inc;
    sum_sq += inc * inc;
  }
  const double n = static_cast<double>(k);
  const double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  if (var < 0.0) var = 0.0;
  if (cfg.bessel) var *= n / (n - 1.0);
  double estimate = var / dt;
  if (cfg.mode == VolatilityMode::vpn) {
    double price_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) price_sum += prices[start + j];
    const double price_mean = price_sum / n;
    estimate /= price_mean * price_mean;
  }
  return estimate;
}

void check_path_length(std::size_t n_points, const VolatilityConfig& cfg) {
  if (n_points < cfg.window + 1) {
    throw std::invalid_argument("volatility.estimate: path needs at least window+1 points");
  }
}

}  // namespace

VolatilitySeries estimate_volatility(const PricePath& path, const VolatilityConfig& cfg) {
  check_path_length(path.prices.size(), cfg);
  const double dt = path.times[1] - path.times[0];
  const WindowLayout layout = layout_windows(path.prices.size() - 1, cfg);

  VolatilitySeries series;
  series.mode = cfg.mode;
  series.window_points = cfg.window;
  series.dropped_windows = layout.dropped;
  series.overlapping = cfg.stride < cfg.window;
  series.centers.reserve(layout.starts.size());
  series.estimates.reserve(layout.starts.size());
  for (std::size_t start : layout.starts) {
    series.centers.push_back(path.times[start] + 0.5 * static_cast<double>(cfg.window) * dt);
    series.estimates.push_back(window_estimate(path.prices, start, cfg, dt));
  }
  return series;
}

namespace {

VolatilitySeries ensemble_series(const PathEnsemble& ensemble, const VolatilityConfig& cfg,
                                 bool parallel) {
  if (ensemble.prices.empty()) {
    throw std::invalid_argument("volatility.estimate: empty ensemble");
  }
  check_path_length(ensemble.times.size(), cfg);
  const double dt = ensemble.times[1] - ensemble.times[0];
  const WindowLayout layout = layout_windows(ensemble.times.size() - 1, cfg);
  const std::size_t n_windows = layout.starts.size();
  const std::size_t n_paths = ensemble.prices.size();

  // Per-path estimates first, then a serial reduction in path order, so the
  // result does not depend on thread scheduling.
  std::vector<double> per_path(n_paths * n_windows);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long p = 0; p < static_cast<long long>(n_paths); ++p) {
      for (std::size_t w = 0; w < n_windows; ++w) {
        per_path[static_cast<std::size_t>(p) * n_windows + w] =
            window_estimate(ensemble.prices[static_cast<std::size_t>(p)], layout.starts[w], cfg,
                            dt);
      }
    }
  } else {
    for (std::size_t p = 0; p < n_paths; ++p) {
      for (std::size_t w = 0; w < n_windows; ++w) {
        per_path[p * n_windows + w] = window_estimate(ensemble.prices[p], layout.starts[w], cfg, dt);
      }
    }
  }
  std::vector<double> sums(n_windows, 0.0);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t w = 0; w < n_windows; ++w) {
      sums[w] += per_path[p * n_windows + w];
    }
  }

  VolatilitySeries series;
  series.mode = cfg.mode;
  series.window_points = cfg.window;
  series.dropped_windows = layout.dropped;
  series.overlapping = cfg.stride < cfg.window;
  series.centers.resize(n_windows);
  series.estimates.resize(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    series.centers[w] =
        ensemble.times[layout.starts[w]] + 0.5 * static_cast<double>(cfg.window) * dt;
    series.estimates[w] = sums[w] / static_cast<double>(n_paths);
  }
  return series;
}

}  // namespace

VolatilitySeries estimate_volatility_ensemble(const PathEnsemble& ensemble,
                                              const VolatilityConfig& cfg) {
  return ensemble_series(ensemble, cfg, true);
}

VolatilitySeries estimate_volatility_ensemble_serial(const PathEnsemble& ensemble,
                                                     const VolatilityConfig& cfg) {
  return ensemble_series(ensemble, cfg, false);
}

double theoretical_volatility(const MarketScenario& scenario, const GFunction& g, double t,
                              VolatilityMode mode, double price_hint) {
  if (t < scenario.t0 || t > scenario.t_end) {
    throw std::invalid_argument("volatility.theory: t outside the scenario horizon");
  }
  const double r = scenario.ratio(t);
  const double base = scenario.sigma * g.prime(r) * r;
  const double vlog = base * base;
  if (mode == VolatilityMode::vlog || mode == VolatilityMode::vpn) {
    return vlog;
  }
  double price = price_hint;
  if (!(price > 0.0)) {
    const std::vector<double> det = deterministic_path(scenario, g);
    std::size_t idx = static_cast<std::size_t>(
        std::llround((t - scenario.t0) / scenario.dt_step));
    if (idx >= det.size()) idx = det.size() - 1;
    price = det[idx];
  }
  return vlog * price * price;
}

void attach_theory(VolatilitySeries* series, const MarketScenario& scenario,
                   const GFunction& g) {
  const std::vector<double> det = deterministic_path(scenario, g);
  series->theory.resize(series->centers.size());
  for (std::size_t i = 0; i < series->centers.size(); ++i) {
    const double t = series->centers[i];
    const double r = scenario.ratio(t);
    const double base = scenario.sigma * g.prime(r) * r;
    double v = base * base;
    if (series->mode == VolatilityMode::vp) {
      std::size_t idx = static_cast<std::size_t>(
          std::llround((t - scenario.t0) / scenario.dt_step));
      if (idx >= det.size()) idx = det.size() - 1;
      v *= det[idx] * det[idx];
    }
    series->theory[i] = v;
  }
}

double window_additivity_ratio(const PathEnsemble& ensemble, const VolatilityConfig& cfg) {
  if (ensemble.prices.size() < 2) {
    throw std::invalid_argument("volatility.additivity: need at least 2 paths");
  }
  check_path_length(ensemble.times.size(), cfg);
  const double dt = ensemble.times[1] - ensemble.times[0];
  const WindowLayout layout = layout_windows(ensemble.times.size() - 1, cfg);
  const double n_paths = static_cast<double>(ensemble.prices.size());
  const bool log_mode = cfg.mode == VolatilityMode::vlog;

  double ratio_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t start : layout.starts) {
    double move_sum = 0.0;
    double move_sq = 0.0;
    double within_sum = 0.0;
    for (const auto& prices : ensemble.prices) {
      const double p_lo = log_mode ? std::log(prices[start]) : prices[start];
      const double p_hi =
          log_mode ? std::log(prices[start + cfg.window]) : prices[start + cfg.window];
      const double move = p_hi - p_lo;
      move_sum += move;
      move_sq += move * move;
      VolatilityConfig plain(cfg.window, cfg.stride,
                             log_mode ? VolatilityMode::vlog : VolatilityMode::vp, cfg.bessel);
      within_sum += window_estimate(prices, start, plain, dt) * dt;
    }
    const double mean_move = move_sum / n_paths;
    const double var_move = move_sq / n_paths - mean_move * mean_move;
    const double mean_within = within_sum / n_paths;
    if (mean_within > 0.0) {
      ratio_sum += var_move / (static_cast<double>(cfg.window) * mean_within);
      ++used;
    }
  }
  if (used == 0) {
    throw NumericError("volatility.additivity: no window had positive increment variance");
  }
  return ratio_sum / static_cast<double>(used);
}

namespace {

std::vector<double> smooth(const std::vector<double>& values, std::size_t half_width) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i > half_width ? i - half_width : 0;
    const std::size_t hi = std::min(values.size() - 1, i + half_width);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Interior local extrema by sign changes of consecutive nonzero differences.
std::vector<std::size_t> interior_extrema(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  int last_sign = 0;
  std::size_t last_change = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double diff = values[i] - values[i - 1];
    const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) {
      out.push_back(last_change);
    }
    last_sign = sign;
    last_change = i;
  }
  return out;
}

std::vector<std::size_t> prominent_extrema(const std::vector<double>& values, bool minima,
                                           double min_prominence) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double v = values[i];
    const bool candidate = minima ? (v <= values[i - 1] && v <= values[i + 1] &&
                                     (v < values[i - 1] || v < values[i + 1]))
                                  : (v >= values[i - 1] && v >= values[i + 1] &&
                                     (v > values[i - 1] || v > values[i + 1]));
    if (!candidate) continue;
    double left_peak = v;
    for (std::size_t j = i; j-- > 0;) {
      if (minima ? values[j] < v : values[j] > v) break;
      left_peak = minima ? std::max(left_peak, values[j]) : std::min(left_peak, values[j]);
    }
    double right_peak = v;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (minima ? values[j] < v : values[j] > v) break;
      right_peak = minima ? std::max(right_peak, values[j]) : std::min(right_peak, values[j]);
    }
    const double prominence =
        minima ? std::min(left_peak, right_peak) - v : v - std::max(left_peak, right_peak);
    if (prominence >= min_prominence) out.push_back(i);
  }
  return out;
}

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = midranks(a);
  const std::vector<double> rb = midranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

ExtremaReport extrema_report(const PathEnsemble& ensemble, const VolatilitySeries& series) {
  if (series.centers.empty()) {
    throw std::invalid_argument("volatility.extrema: empty volatility series");
  }
  const std::size_t n_times = ensemble.times.size();
  std::vector<double> mean_price(n_times, 0.0);
  for (const auto& prices : ensemble.prices) {
    for (std::size_t i = 0; i < n_times; ++i) mean_price[i] += prices[i];
  }
  for (double& v : mean_price) v /= static_cast<double>(ensemble.prices.size());

  const double dt = ensemble.times[1] - ensemble.times[0];
  const std::size_t k_points =
      series.window_points > 0 ? series.window_points
                               : std::max<std::size_t>(2, (ensemble.times.size() - 1) / 8);
  const std::size_t half_width = std::max<std::size_t>(1, k_points / 2);
  const std::vector<double> smoothed = smooth(mean_price, half_width);

  ExtremaReport report;
  for (std::size_t idx : interior_extrema(smoothed)) {
    report.price_extrema_times.push_back(ensemble.times[idx]);
  }
  report.no_interior_extrema = report.price_extrema_times.empty();

  const auto [min_it, max_it] =
      std::minmax_element(series.estimates.begin(), series.estimates.end());
  const double prominence_floor = 0.1 * (*max_it - *min_it);
  for (std::size_t idx : prominent_extrema(series.estimates, true, prominence_floor)) {
    report.vol_min_times.push_back(series.centers[idx]);
  }
  for (std::size_t idx : prominent_extrema(series.estimates, false, prominence_floor)) {
    report.vol_max_times.push_back(series.centers[idx]);
  }
  report.vol_peak_time =
      series.centers[static_cast<std::size_t>(max_it - series.estimates.begin())];

  // Per volatility window, the relative move of the smoothed mean price.
  std::vector<double> window_moves(series.centers.size(), 0.0);
  std::vector<double> window_log_moves(series.centers.size(), 0.0);
  for (std::size_t w = 0; w < series.centers.size(); ++w) {
    const double start_f =
        (series.centers[w] - ensemble.times.front()) / dt - 0.5 * static_cast<double>(k_points);
    const std::size_t start =
        start_f > 0.0 ? static_cast<std::size_t>(std::llround(start_f)) : 0;
    const std::size_t end = std::min(n_times - 1, start + k_points);
    window_moves[w] = std::fabs((smoothed[end] - smoothed[start]) / smoothed[start]);
    window_log_moves[w] = std::fabs(std::log(smoothed[end]) - std::log(smoothed[start]));
  }
  const auto move_it = std::max_element(window_moves.begin(), window_moves.end());
  report.max_move_time =
      series.centers[static_cast<std::size_t>(move_it - window_moves.begin())];
  report.move_to_volmax_offset = std::fabs(report.max_move_time - report.vol_peak_time);

  for (double pt : report.price_extrema_times) {
    double best = HUGE_VAL;
    for (double vt : report.vol_min_times) {
      best = std::min(best, std::fabs(pt - vt));
    }
    report.price_to_volmin_offsets.push_back(best);
  }
  report.rank_correlation = spearman(window_log_moves, series.estimates);
  return report;
}

PricePath ingest_prices(const std::string& file_path) {
  const auto rows = csvio::read_two_column(file_path, "t,price");
  PricePath path;
  path.scheme = Scheme::ingested;
  path.times.reserve(rows.size());
  path.prices.reserve(rows.size());
  path.log_prices.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [t, price] = rows[i];
    if (i > 0 && !(t > rows[i - 1].first)) {
      throw std::runtime_error("volatility.ingest: '" + file_path + "' row " +
                               std::to_string(i + 1) + ": times must be strictly increasing");
    }
    if (!(price > 0.0)) {
      throw std::runtime_error("volatility.ingest: '" + file_path + "' row " +
                               std::to_string(i + 1) + ": price must be > 0");
    }
    path.times.push_back(t);
    path.prices.push_back(price);
    path.log_prices.push_back(std::log(price));
  }
  if (rows.size() >= 3) {
    const double delta = rows[1].first - rows[0].first;
    for (std::size_t i = 2; i < rows.size(); ++i) {
      const double step = rows[i].first - rows[i - 1].first;
      if (std::fabs(step - delta) > 1e-9 * std::max(1.0, std::fabs(delta))) {
        throw std::runtime_error(
            "volatility.ingest: '" + file_path + "' row " + std::to_string(i + 1) +
            ": non-uniform grid spacing (expected " + csvio::format_real(delta) + ", got " +
            csvio::format_real(step) + "); resample to a uniform grid first");
      }
    }
  }
  return path;
}

void write_volatility_csv(const VolatilitySeries& series, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.centers.size());
  const bool has_theory = series.theory.size() == series.centers.size();
  for (std::size_t i = 0; i < series.centers.size(); ++i) {
    rows.push_back({csvio::format_real(series.centers[i]),
                    csvio::format_real(series.estimates[i]),
                    has_theory ? csvio::format_real(series.theory[i]) : std::string()});
  }
  csvio::write_rows(path, "t_center,estimate,theory", rows);
}

}  // namespace sdlab
