#include "sdlab/density.hpp"

#include <cfloat>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "sdlab/csv.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/quadrature.hpp"

namespace sdlab {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

// Densities above this magnitude of the argument are flushed to zero before
// any inverse solve; the mass beyond is far below double resolution.
constexpr double kArgCap = 1e300;

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("density.params: ") + what +
                                " must be finite and > 0");
  }
}

}  // namespace

NoiseParams::NoiseParams(double sigma_, double dt_, double d_over_s_)
    : sigma(sigma_), dt(dt_), d_over_s(d_over_s_) {
  require_finite_positive(sigma, "sigma");
  require_finite_positive(dt, "dt");
  require_finite_positive(d_over_s, "d_over_s");
}

double NoiseParams::a() const { return sigma / (2.0 * std::sqrt(dt)); }

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::fx: return "fx";
    case DensityKind::fx1: return "fx1";
    case DensityKind::f2: return "f2";
    case DensityKind::f3: return "f3";
    case DensityKind::f3n: return "f3n";
  }
  throw std::logic_error("density.kind: unreachable");
}

DensityKind density_kind_from_string(const std::string& name) {
  if (name == "fx") return DensityKind::fx;
  if (name == "fx1") return DensityKind::fx1;
  if (name == "f2") return DensityKind::f2;
  if (name == "f3") return DensityKind::f3;
  if (name == "f3n") return DensityKind::f3n;
  throw std::invalid_argument("density.kind: unknown density '" + name + "'");
}

double fx_density(const NoiseParams& params, double x) {
  if (x == -1.0) return 0.0;
  const double a = params.a();
  const double t = (x - 1.0) / (x + 1.0);
  const double exponent = -t * t / (2.0 * a * a);
  const double log_norm =
      kLogSqrt2Pi + std::log(a) + 2.0 * std::log(std::fabs(x + 1.0)) - std::log(2.0);
  return std::exp(exponent - log_norm);
}

double fx1_density(const NoiseParams& params, double x) {
  const double r = params.d_over_s;
  if (x == -r) return 0.0;
  const double a = params.a();
  const double t = (x - r) / (x + r);
  const double exponent = -t * t / (2.0 * a * a);
  const double log_norm = kLogSqrt2Pi + std::log(params.sigma) - 0.5 * std::log(params.dt) -
                          std::log(4.0 * r) + 2.0 * std::log(std::fabs(x + r));
  return std::exp(exponent - log_norm);
}

namespace {

// Shared log-space evaluation for the transformed densities. time_scaled
// selects the per-step form (argument divided by dt, density divided by dt).
double transformed_density(const GFunction& g, const NoiseParams& params, double y,
                           bool time_scaled) {
  if (std::fabs(y) > kArgCap) return 0.0;
  const double u = time_scaled ? y / params.dt : y;
  if (!std::isfinite(u)) return 0.0;
  const double r = params.d_over_s;
  const double x = g.inverse(u);
  const double a = params.a();
  const double t = (x - r) / (x + r);
  const double exponent = -t * t / (2.0 * a * a);
  double log_norm = kLogSqrt2Pi + std::log(params.sigma) - 0.5 * std::log(params.dt) -
                    std::log(4.0 * r) + 2.0 * std::log(x + r) + std::log(g.prime(x));
  if (time_scaled) log_norm += std::log(params.dt);
  return std::exp(exponent - log_norm);
}

}  // namespace

double f2_density(const GFunction& g, const NoiseParams& params, double y) {
  return transformed_density(g, params, y, false);
}

double f3_density(const GFunction& g, const NoiseParams& params, double y) {
  return transformed_density(g, params, y, true);
}

double f3_mode(const GFunction& g, const NoiseParams& params) {
  return g.value(params.d_over_s) * params.dt;
}

double f3n_std(const GFunction& g, const NoiseParams& params) {
  const double r = params.d_over_s;
  return params.sigma * std::sqrt(params.dt) * g.prime(r) * r;
}

double f3n_density(const GFunction& g, const NoiseParams& params, double y) {
  const double m = f3_mode(g, params);
  const double s = f3n_std(g, params);
  if (s == 0.0) {
    throw NumericError(
        "density.f3n: surrogate is degenerate here (zero response slope at this ratio)");
  }
  const double z = (y - m) / s;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * s);
}

double f3_exponent(const GFunction& g, const NoiseParams& params, double y) {
  if (std::fabs(y) > kArgCap) return -HUGE_VAL;
  const double u = y / params.dt;
  if (!std::isfinite(u)) return -HUGE_VAL;
  const double r = params.d_over_s;
  const double x = g.inverse(u);
  const double a = params.a();
  const double t = (x - r) / (x + r);
  return -t * t / (2.0 * a * a);
}

TailRatio tail_ratio(const GFunction& g, const NoiseParams& params, double y) {
  const double gauss = f3n_density(g, params, y);
  if (!(gauss >= DBL_MIN)) {
    return {HUGE_VAL, true};
  }
  return {f3_density(g, params, y) / gauss, false};
}

namespace {

double eval_density(const GFunction* g, const NoiseParams& params, DensityKind kind, double v) {
  switch (kind) {
    case DensityKind::fx: return fx_density(params, v);
    case DensityKind::fx1: return fx1_density(params, v);
    case DensityKind::f2: return f2_density(*g, params, v);
    case DensityKind::f3: return f3_density(*g, params, v);
    case DensityKind::f3n: return f3n_density(*g, params, v);
  }
  throw std::logic_error("density.eval: unreachable");
}

void require_g(const GFunction* g, DensityKind kind) {
  if (!g && (kind == DensityKind::f2 || kind == DensityKind::f3 || kind == DensityKind::f3n)) {
    throw std::invalid_argument("density: kind '" + to_string(kind) + "' requires a G function");
  }
}

struct CurveCenter {
  double center;
  double spread;
};

// One-sigma width of the transformed densities measured through the map
// itself rather than via G'(r), which vanishes for the odd family at a
// balanced ratio and would collapse the integration window to nothing.
double ratio_spread(const GFunction& g, double r, double a) {
  const double am = std::min(a, 0.5);
  const double up = (1.0 + am) / (1.0 - am);
  return 0.5 * (g.value(r * up) - g.value(r / up));
}

CurveCenter curve_center(const GFunction* g, const NoiseParams& params, DensityKind kind) {
  const double a = params.a();
  const double r = params.d_over_s;
  switch (kind) {
    case DensityKind::fx: return {1.0, 2.0 * a};
    case DensityKind::fx1: return {r, 2.0 * a * r};
    case DensityKind::f2: return {g->value(r), ratio_spread(*g, r, a)};
    case DensityKind::f3: return {f3_mode(*g, params), params.dt * ratio_spread(*g, r, a)};
    case DensityKind::f3n: return {f3_mode(*g, params), f3n_std(*g, params)};
  }
  throw std::logic_error("density.center: unreachable");
}

}  // namespace

namespace {

// Full-line integral of f given its central window [lo_edge, hi_edge]. The
// transformed densities carry an integrable |y|^-(q-1)/q pole at y = 0 when
// G'(1) = 0 (the odd family above first order); plain bisection leaves an
// O(width^(1/q)) hole at its resolution floor, so the two core pieces meeting
// at the pole are integrated in the substituted variable y = s^q, which
// removes the singularity entirely.
double line_integral_with_pole(const std::function<double(double)>& f, double lo_edge,
                               double hi_edge, double spread, double abs_tol, bool odd_pole,
                               double q) {
  if (!odd_pole || !(lo_edge < 0.0 && hi_edge > 0.0)) {
    const double center = 0.5 * (lo_edge + hi_edge);
    // The integrand may vanish at the density mode (weighted integrals); the
    // interior splits keep the first panel from reading the bump as empty.
    return quad::integrate_line_split(f, center, hi_edge - center, abs_tol,
                                      {center - 2.0 * spread, center + 2.0 * spread});
  }
  const double seg_tol = 0.25 * abs_tol;
  auto regular = [&](double sign) {
    return [&f, q, sign](double s) {
      return f(sign * std::pow(s, q)) * q * std::pow(s, q - 1.0);
    };
  };
  const double core =
      quad::integrate(regular(-1.0), 0.0, std::pow(-lo_edge, 1.0 / q), seg_tol) +
      quad::integrate(regular(1.0), 0.0, std::pow(hi_edge, 1.0 / q), seg_tol);
  const double up = quad::integrate_upper_tail(f, hi_edge, 0.25 * abs_tol);
  const double down = quad::integrate_lower_tail(f, lo_edge, 0.25 * abs_tol);
  return core + up + down;
}

bool has_odd_pole(const GFunction* g, DensityKind kind) {
  const bool transformed = kind == DensityKind::f2 || kind == DensityKind::f3;
  return g && transformed && g->family() == GFamily::odd_power_diff && g->q() > 1.0;
}

}  // namespace

double density_mass(const GFunction* g, const NoiseParams& params, DensityKind kind,
                    double abs_tol) {
  require_g(g, kind);
  const CurveCenter c = curve_center(g, params, kind);
  auto f = [&](double v) { return eval_density(g, params, kind, v); };
  return line_integral_with_pole(f, c.center - 50.0 * c.spread, c.center + 50.0 * c.spread,
                                 c.spread, abs_tol, has_odd_pole(g, kind), g ? g->q() : 0.0);
}

double weighted_density_integral(const GFunction& g, const NoiseParams& params,
                                 DensityKind kind,
                                 const std::function<double(double)>& weight,
                                 double abs_tol) {
  if (kind != DensityKind::f2 && kind != DensityKind::f3) {
    throw std::invalid_argument("density.weighted_integral: kind must be f2 or f3");
  }
  const CurveCenter c = curve_center(&g, params, kind);
  auto f = [&](double v) {
    const double d = eval_density(&g, params, kind, v);
    return d == 0.0 ? 0.0 : weight(v) * d;
  };
  return line_integral_with_pole(f, c.center - 50.0 * c.spread, c.center + 50.0 * c.spread,
                                 c.spread, abs_tol, has_odd_pole(&g, kind), g.q());
}

std::pair<double, double> default_range(const GFunction* g, const NoiseParams& params,
                                        DensityKind kind, double n_std) {
  require_g(g, kind);
  const CurveCenter c = curve_center(g, params, kind);
  return {c.center - n_std * c.spread, c.center + n_std * c.spread};
}

namespace {

DensityCurve make_curve(const GFunction* g, const NoiseParams& params, DensityKind kind,
                        double y_min, double y_max, int n) {
  require_g(g, kind);
  if (n < 2) {
    throw std::invalid_argument("density.tabulate: need at least 2 grid points");
  }
  if (!(y_max > y_min)) {
    throw std::invalid_argument("density.tabulate: y_max must exceed y_min");
  }
  DensityCurve curve{kind, params, g != nullptr,
                     g ? g->family() : GFamily::power_diff, g ? g->q() : 0.0,
                     std::vector<double>(static_cast<size_t>(n)),
                     std::vector<double>(static_cast<size_t>(n))};
  const double step = (y_max - y_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    curve.ys[static_cast<size_t>(i)] = y_min + step * i;
  }
  return curve;
}

}  // namespace

DensityCurve tabulate_serial(const GFunction* g, const NoiseParams& params, DensityKind kind,
                             double y_min, double y_max, int n) {
  DensityCurve curve = make_curve(g, params, kind, y_min, y_max, n);
  for (int i = 0; i < n; ++i) {
    curve.fs[static_cast<size_t>(i)] = eval_density(g, params, kind, curve.ys[static_cast<size_t>(i)]);
  }
  return curve;
}

DensityCurve tabulate(const GFunction* g, const NoiseParams& params, DensityKind kind,
                      double y_min, double y_max, int n) {
  DensityCurve curve = make_curve(g, params, kind, y_min, y_max, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    curve.fs[static_cast<size_t>(i)] = eval_density(g, params, kind, curve.ys[static_cast<size_t>(i)]);
  }
  return curve;
}

void write_curve_csv(const DensityCurve& curve, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.ys.size());
  for (size_t i = 0; i < curve.ys.size(); ++i) {
    rows.push_back({csvio::format_real(curve.ys[i]), csvio::format_real(curve.fs[i])});
  }
  csvio::write_rows(path, "y,f", rows);
}

void write_curve_sidecar(const DensityCurve& curve, const std::string& path) {
  nlohmann::json j;
  j["which"] = to_string(curve.which);
  j["sigma"] = curve.params.sigma;
  j["dt"] = curve.params.dt;
  j["d_over_s"] = curve.params.d_over_s;
  if (curve.has_g) {
    j["family"] = to_string(curve.family);
    j["q"] = curve.q;
  } else {
    j["family"] = nullptr;
    j["q"] = nullptr;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("density.sidecar: cannot open '" + path + "' for writing");
  }
  out << j.dump(2) << '\n';
}

}  // namespace sdlab
