#include "sdlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdlab/csv.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/rng.hpp"

namespace sdlab {

namespace {

void require_sorted_knots(const std::vector<std::pair<double, double>>& knots,
                          const char* what) {
  if (knots.empty()) {
    throw std::invalid_argument(std::string("sde.signal: ") + what + " needs at least one knot");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) {
      throw std::invalid_argument(std::string("sde.signal: ") + what +
                                  " knots must have strictly increasing times");
    }
  }
}

}  // namespace

Signal::Signal(SignalKind kind, std::vector<std::pair<double, double>> knots, double mean,
               double amplitude, double period)
    : kind_(kind), knots_(std::move(knots)), mean_(mean), amplitude_(amplitude),
      period_(period) {}

Signal Signal::constant(double value) { return Signal(SignalKind::constant, {}, value, 0.0, 1.0); }

Signal Signal::sinusoid(double mean, double amplitude, double period) {
  if (!(period > 0.0)) {
    throw std::invalid_argument("sde.signal: sinusoid period must be > 0");
  }
  return Signal(SignalKind::sinusoid, {}, mean, amplitude, period);
}

Signal Signal::piecewise(std::vector<std::pair<double, double>> knots) {
  require_sorted_knots(knots, "piecewise");
  return Signal(SignalKind::piecewise, std::move(knots), 0.0, 0.0, 1.0);
}

Signal Signal::from_table(std::vector<std::pair<double, double>> table) {
  require_sorted_knots(table, "csv");
  return Signal(SignalKind::csv, std::move(table), 0.0, 0.0, 1.0);
}

Signal Signal::from_csv(const std::string& path) {
  return from_table(csvio::read_two_column(path, "t,value"));
}

double Signal::operator()(double t) const {
  switch (kind_) {
    case SignalKind::constant:
      return mean_;
    case SignalKind::sinusoid:
      return mean_ + amplitude_ * std::sin(2.0 * std::numbers::pi * t / period_);
    case SignalKind::piecewise: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                 [](double v, const auto& k) { return v < k.first; });
      if (it == knots_.begin()) return knots_.front().second;
      return (it - 1)->second;
    }
    case SignalKind::csv: {
      if (t <= knots_.front().first) return knots_.front().second;
      if (t >= knots_.back().first) return knots_.back().second;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                 [](double v, const auto& k) { return v < k.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    }
  }
  throw std::logic_error("sde.signal: unreachable");
}

MarketScenario::MarketScenario(Signal demand_, Signal supply_, double sigma_, double t0_,
                               double t_end_, double dt_step_, double p0_)
    : demand(std::move(demand_)), supply(std::move(supply_)), sigma(sigma_), t0(t0_),
      t_end(t_end_), dt_step(dt_step_), p0(p0_) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sde.scenario: sigma must be finite and >= 0");
  }
  if (!(p0 > 0.0)) {
    throw std::invalid_argument("sde.scenario: p0 must be > 0");
  }
  if (!(t_end > t0)) {
    throw std::invalid_argument("sde.scenario: t_end must exceed t0");
  }
  const double span = t_end - t0;
  if (!(dt_step > 0.0) || dt_step > span / 10.0) {
    throw std::invalid_argument("sde.scenario: dt_step must be positive and at most (t_end - t0)/10");
  }
  const double steps = span / dt_step;
  if (std::fabs(steps - std::llround(steps)) > 1e-8 * steps) {
    throw std::invalid_argument("sde.scenario: (t_end - t0) must be an integer multiple of dt_step");
  }
  for (int i = 0; i < 1000; ++i) {
    const double t = t0 + span * i / 999.0;
    if (!(demand(t) > 0.0)) {
      throw std::invalid_argument("sde.scenario: demand signal must be positive on the horizon (violated at t=" +
                                  csvio::format_real(t) + ")");
    }
    if (!(supply(t) > 0.0)) {
      throw std::invalid_argument("sde.scenario: supply signal must be positive on the horizon (violated at t=" +
                                  csvio::format_real(t) + ")");
    }
  }
}

std::size_t MarketScenario::n_steps() const {
  return static_cast<std::size_t>(std::llround((t_end - t0) / dt_step));
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::euler_p: return "euler_p";
    case Scheme::euler_logp: return "euler_logp";
    case Scheme::sym_p: return "sym_p";
    case Scheme::discrete_tatonnement: return "discrete_tatonnement";
    case Scheme::ingested: return "ingested";
  }
  throw std::logic_error("sde.scheme: unreachable");
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler_p") return Scheme::euler_p;
  if (name == "euler_logp") return Scheme::euler_logp;
  if (name == "sym_p") return Scheme::sym_p;
  if (name == "discrete_tatonnement") return Scheme::discrete_tatonnement;
  if (name == "ingested") return Scheme::ingested;
  throw std::invalid_argument("sde.scheme: unknown scheme '" + name + "'");
}

namespace {

PricePath simulate_one(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                       std::uint64_t seed, std::uint64_t stream) {
  if (scheme != Scheme::euler_p && scheme != Scheme::euler_logp && scheme != Scheme::sym_p) {
    throw std::invalid_argument("sde.simulate: scheme must be euler_p, euler_logp or sym_p");
  }
  const std::size_t m = scenario.n_steps();
  const double dt = scenario.dt_step;
  const double sqrt_dt = std::sqrt(dt);

  PricePath path;
  path.scheme = scheme;
  path.seed = seed;
  path.times.resize(m + 1);
  path.prices.resize(m + 1);
  path.log_prices.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    path.times[i] = scenario.t0 + dt * static_cast<double>(i);
  }

  SplitStream noise(seed, stream, rng_domain::sde_path);
  double price = scenario.p0;
  double log_price = std::log(scenario.p0);
  path.prices[0] = price;
  path.log_prices[0] = log_price;

  for (std::size_t k = 0; k < m; ++k) {
    const double t = path.times[k];
    const double r = scenario.ratio(t);
    const double dw = sqrt_dt * noise.next_normal();
    const double diffusion = scenario.sigma * g.prime(r) * r;
    switch (scheme) {
      case Scheme::euler_p: {
        price += g.value(r) * price * dt + diffusion * price * dw;
        if (!(price > 0.0)) {
          throw NumericError("sde.simulate: euler_p price became non-positive at step " +
                             std::to_string(k + 1) + " of " + std::to_string(m) +
                             " (dt_step too coarse for this sigma)");
        }
        log_price = std::log(price);
        break;
      }
      case Scheme::euler_logp: {
        log_price += (g.value(r) - 0.5 * diffusion * diffusion) * dt + diffusion * dw;
        price = std::exp(log_price);
        break;
      }
      case Scheme::sym_p: {
        const double inv = 1.0 / r;
        const double drift = 0.5 * (g.value(r) - g.value(inv));
        const double diff_sym =
            0.5 * scenario.sigma * (g.prime(r) * r + g.prime(inv) * inv);
        price += drift * price * dt + diff_sym * price * dw;
        if (!(price > 0.0)) {
          throw NumericError("sde.simulate: sym_p price became non-positive at step " +
                             std::to_string(k + 1) + " of " + std::to_string(m) +
                             " (dt_step too coarse for this sigma)");
        }
        log_price = std::log(price);
        break;
      }
      default:
        break;
    }
    path.prices[k + 1] = price;
    path.log_prices[k + 1] = log_price;
  }
  return path;
}

}  // namespace

PricePath simulate_path(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                        std::uint64_t seed) {
  return simulate_one(scenario, g, scheme, seed, 0);
}

namespace {

PathEnsemble run_ensemble(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                          std::uint64_t seed, std::size_t n_paths, bool parallel) {
  if (n_paths == 0) {
    throw std::invalid_argument("sde.ensemble: n_paths must be >= 1");
  }
  PathEnsemble ensemble;
  ensemble.scheme = scheme;
  ensemble.seed = seed;
  ensemble.prices.resize(n_paths);

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long k = 0; k < static_cast<long long>(n_paths); ++k) {
      PricePath p = simulate_one(scenario, g, scheme, seed, static_cast<std::uint64_t>(k));
      ensemble.prices[static_cast<std::size_t>(k)] = std::move(p.prices);
    }
  } else {
    for (std::size_t k = 0; k < n_paths; ++k) {
      PricePath p = simulate_one(scenario, g, scheme, seed, k);
      ensemble.prices[k] = std::move(p.prices);
    }
  }

  const std::size_t m = scenario.n_steps();
  ensemble.times.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    ensemble.times[i] = scenario.t0 + scenario.dt_step * static_cast<double>(i);
  }
  return ensemble;
}

}  // namespace

PathEnsemble simulate_ensemble(const MarketScenario& scenario, const GFunction& g, Scheme scheme,
                               std::uint64_t seed, std::size_t n_paths) {
  return run_ensemble(scenario, g, scheme, seed, n_paths, true);
}

PathEnsemble simulate_ensemble_serial(const MarketScenario& scenario, const GFunction& g,
                                      Scheme scheme, std::uint64_t seed, std::size_t n_paths) {
  return run_ensemble(scenario, g, scheme, seed, n_paths, false);
}

std::vector<double> deterministic_path(const MarketScenario& scenario, const GFunction& g) {
  const std::size_t m = scenario.n_steps();
  std::vector<double> prices(m + 1);
  double log_price = std::log(scenario.p0);
  prices[0] = scenario.p0;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = scenario.t0 + scenario.dt_step * static_cast<double>(k);
    log_price += g.value(scenario.ratio(t)) * scenario.dt_step;
    prices[k + 1] = std::exp(log_price);
  }
  return prices;
}

std::vector<double> discrete_tatonnement(double p0, const std::vector<double>& d,
                                         const std::vector<double>& s, double tau0,
                                         TatonnementVariant variant, const GFunction* g) {
  if (d.size() != s.size() || d.empty()) {
    throw std::invalid_argument("sde.tatonnement: d and s must be nonempty and equally long");
  }
  if (!(tau0 > 0.0)) {
    throw std::invalid_argument("sde.tatonnement: tau0 must be > 0");
  }
  if (!(p0 > 0.0)) {
    throw std::invalid_argument("sde.tatonnement: p0 must be > 0");
  }
  for (double v : s) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("sde.tatonnement: supply values must be > 0");
    }
  }
  if (variant == TatonnementVariant::nonlinear && !g) {
    throw std::invalid_argument("sde.tatonnement: nonlinear variant requires a G function");
  }

  std::vector<double> prices;
  prices.reserve(d.size() + 1);
  prices.push_back(p0);
  double p = p0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    switch (variant) {
      case TatonnementVariant::raw:
        p += (d[k] - s[k]) / tau0;
        if (!(p > 0.0)) {
          throw NumericError("sde.tatonnement: raw variant price became non-positive at step " +
                             std::to_string(k + 1) +
                             " (absolute-units recursion is not scale-safe)");
        }
        break;
      case TatonnementVariant::normalized:
        p += p * (d[k] - s[k]) / (tau0 * s[k]);
        break;
      case TatonnementVariant::nonlinear:
        p += p * g->value(d[k] / s[k]) / tau0;
        break;
    }
    prices.push_back(p);
  }
  return prices;
}

SupplyDemandCurves::SupplyDemandCurves(double demand_intercept_, double demand_slope_,
                                       double supply_intercept_, double supply_slope_)
    : demand_intercept(demand_intercept_), demand_slope(demand_slope_),
      supply_intercept(supply_intercept_), supply_slope(supply_slope_) {
  if (!(demand_slope < 0.0)) {
    throw std::invalid_argument("sde.curves: demand curve must slope downward");
  }
  if (!(supply_slope > 0.0)) {
    throw std::invalid_argument("sde.curves: supply curve must slope upward");
  }
  if (!(intersect_curves(*this) > 0.0)) {
    throw std::invalid_argument("sde.curves: curves must intersect at a positive price");
  }
}

double intersect_curves(const SupplyDemandCurves& curves) {
  const double slope_gap = curves.supply_slope - curves.demand_slope;
  if (slope_gap == 0.0) {
    throw NumericError("sde.curves: curves are parallel");
  }
  return (curves.demand_intercept - curves.supply_intercept) / slope_gap;
}

void write_path_csv(const PricePath& path, const std::string& path_name) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(path.times.size());
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    rows.push_back({csvio::format_real(path.times[i]), csvio::format_real(path.prices[i])});
  }
  csvio::write_rows(path_name, "t,price", rows);
}

void write_ensemble_mean_csv(const PathEnsemble& ensemble, const std::string& path_name) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ensemble.times.size());
  for (std::size_t i = 0; i < ensemble.times.size(); ++i) {
    double sum = 0.0;
    for (const auto& path : ensemble.prices) sum += path[i];
    rows.push_back({csvio::format_real(ensemble.times[i]),
                    csvio::format_real(sum / static_cast<double>(ensemble.prices.size()))});
  }
  csvio::write_rows(path_name, "t,price", rows);
}

}  // namespace sdlab
