// Acceptance gate: one self-contained check per shipping criterion, one
// verdict line each. Numeric thresholds are stated inline next to the check
// they guard. Exit code = number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sdlab/asymptotics.hpp"
#include "sdlab/density.hpp"
#include "sdlab/gfunc.hpp"
#include "sdlab/quadrature.hpp"
#include "sdlab/sampler.hpp"
#include "sdlab/sde.hpp"
#include "sdlab/volatility.hpp"

namespace fs = std::filesystem;
using namespace sdlab;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Verdict {
  bool pass;
  std::string detail;
};

// ---------------------------------------------------------------- criterion 1
Verdict check_axioms() {
  const std::vector<std::pair<GFamily, double>> combos = {
      {GFamily::power_diff, 0.5}, {GFamily::power_diff, 1.0}, {GFamily::power_diff, 2.0},
      {GFamily::odd_power_diff, 1.0}, {GFamily::odd_power_diff, 3.0}};
  const std::vector<double> grid = log_grid(0.05, 20.0, 200);
  double worst = 0.0;
  for (const auto& [family, q] : combos) {
    const ConditionGReport report = check_condition_g(GFunction(family, q), grid);
    worst = std::max(worst, report.max_violation());
    if (!report.all_pass() || report.max_violation() >= 1e-10) {
      return {false, std::string(to_string(family)) + " q=" + fmt(q) +
                         " violation " + fmt(report.max_violation())};
    }
  }
  return {true, "max violation " + fmt(worst) + " across 5 family/exponent combos"};
}

// ---------------------------------------------------------------- criterion 2
Verdict check_normalization() {
  double worst = 0.0;
  std::string worst_at;
  for (const auto& [family, q] :
       std::vector<std::pair<GFamily, double>>{{GFamily::power_diff, 1.0},
                                               {GFamily::odd_power_diff, 3.0}}) {
    const GFunction g(family, q);
    for (double sigma : {0.05, 0.1, 0.2}) {
      for (double dt : {0.25, 1.0}) {
        for (double r : {0.8, 1.0, 1.25}) {
          const NoiseParams p(sigma, dt, r);
          const double mass = density_mass(&g, p, DensityKind::f3, 1e-8);
          const double err = std::fabs(mass - 1.0);
          if (err > worst) {
            worst = err;
            worst_at = std::string(to_string(family)) + " sigma=" + fmt(sigma) +
                       " dt=" + fmt(dt) + " r=" + fmt(r);
          }
        }
      }
    }
  }
  const bool pass = worst <= 1e-5;
  return {pass, "36-point sweep, worst |mass-1| " + fmt(worst) + " at " + worst_at};
}

// ---------------------------------------------------------------- criterion 3
Verdict check_surrogate_order() {
  const GFunction g(GFamily::power_diff, 1.0);
  const std::vector<double> sigmas = {0.1, 0.05, 0.025, 0.0125};
  struct Combo {
    const char* name;
    std::function<double(double)> obs;
    double r;
  };
  const std::vector<Combo> combos = {
      {"tanh@1.0", [](double y) { return std::tanh(y); }, 1.0},
      {"cauchy@1.0", [](double y) { return 1.0 / (1.0 + y * y); }, 1.0},
      {"tanh@1.2", [](double y) { return std::tanh(y); }, 1.2},
      {"cauchy@1.2", [](double y) { return 1.0 / (1.0 + y * y); }, 1.2}};
  bool all_pass = true;
  std::string detail;
  for (const auto& combo : combos) {
    const NoiseParams base(sigmas.front(), 1.0, combo.r);
    const ConvergenceResult res = convergence_experiment(combo.obs, g, base, sigmas, false);
    bool pass;
    std::string label;
    if (res.degenerate) {
      // At a balanced ratio an odd observable has identical expectations
      // under both densities, so the measured difference is integration
      // noise: the quadratic error bound holds with a vanishing constant.
      pass = combo.r == 1.0;
      label = "at noise floor (bound trivially met)";
    } else if (res.fitted_order > 2.3 && combo.r == 1.0) {
      // Symmetry cancels the quadratic term itself, leaving the next even
      // order; faster decay than the bound demands, slope reported as is.
      pass = true;
      label = "slope " + fmt(res.fitted_order) + " (symmetric point, superconvergent)";
    } else {
      pass = res.fitted_order >= 1.7 && res.fitted_order <= 2.3;
      label = "slope " + fmt(res.fitted_order);
    }
    all_pass = all_pass && pass;
    if (!detail.empty()) detail += ", ";
    detail += std::string(combo.name) + " " + label + (pass ? "" : " [FAIL]");
  }
  return {all_pass, detail};
}

// ---------------------------------------------------------------- criterion 4
Verdict check_alpha_scaling() {
  const GFunction g(GFamily::power_diff, 1.0);
  const std::vector<double> sigmas = {0.1, 0.05, 0.025, 0.0125};
  const NoiseParams base(sigmas.front(), 1.0, 1.2);
  const auto obs = [](double y) { return std::tanh(y); };
  const ConvergenceResult plain = convergence_experiment(obs, g, base, sigmas, false);
  const ConvergenceResult scaled = convergence_experiment(obs, g, base, sigmas, true);
  const CollapseReport rep = check_alpha_collapse(plain, scaled);
  const bool pass = rep.comparable && rep.pass;
  return {pass, "overlap ratios " + fmt(rep.ratio_lo) + " / " + fmt(rep.ratio_hi) +
                    " (factor-2 band)"};
}

// ---------------------------------------------------------------- criterion 5
Verdict check_curvature() {
  double worst = 0.0;
  for (const auto& [r, q] :
       std::vector<std::pair<double, double>>{{1.0, 1.0}, {1.5, 1.0}, {1.2, 2.0}}) {
    const GFunction g(GFamily::power_diff, q);
    const CurvatureCheck c = verify_h1_curvature(g, NoiseParams(0.05, 1.0, r));
    worst = std::max(worst, std::fabs(c.lhs - c.rhs) / std::fabs(c.rhs));
  }
  const bool pass = worst <= 1e-3;
  return {pass, "worst relative curvature mismatch " + fmt(worst) + " over 3 (ratio, q) pairs"};
}

// ---------------------------------------------------------------- criterion 6
Verdict check_sampler_match() {
  const GFunction g(GFamily::power_diff, 1.0);
  const NoiseParams p(0.1, 1.0, 1.2);
  const SampleBatch batch = sample_price_changes(g, p, 1000000, 20260822);
  const double ks_exact = ks_distance(batch, ReferenceDensity::exact, g).ks_statistic;
  if (ks_exact > 0.002) {
    return {false, "KS vs exact density " + fmt(ks_exact) + " > 0.002 at 1e6 draws"};
  }
  std::vector<double> ks_gauss;
  for (double sigma : {0.4, 0.2, 0.1, 0.05}) {
    const NoiseParams ps(sigma, 1.0, 1.2);
    const SampleBatch b = sample_price_changes(g, ps, 1000000, 31 + ks_gauss.size());
    ks_gauss.push_back(ks_distance(b, ReferenceDensity::gaussian, g).ks_statistic);
  }
  for (std::size_t i = 1; i < ks_gauss.size(); ++i) {
    if (ks_gauss[i] > ks_gauss[i - 1]) {
      return {false, "surrogate KS not monotone: " + fmt(ks_gauss[i - 1]) + " -> " +
                         fmt(ks_gauss[i]) + " as sigma shrinks"};
    }
  }
  return {true, "KS vs exact " + fmt(ks_exact) + "; surrogate KS " + fmt(ks_gauss[0]) + " > " +
                    fmt(ks_gauss[1]) + " > " + fmt(ks_gauss[2]) + " > " + fmt(ks_gauss[3])};
}

// ---------------------------------------------------------------- criterion 7
Verdict check_fat_tails() {
  const GFunction g(GFamily::power_diff, 1.0);
  const NoiseParams p(0.2, 1.0, 1.2);
  const SampleBatch batch = sample_price_changes(g, p, 10000000, 424242);
  const double threshold = f3_mode(g, p) + 5.0 * f3n_std(g, p);
  const auto points = tail_exceedance(batch, {threshold}, g);
  const double empirical = points[0].empirical;
  const double gaussian = points[0].gaussian;
  const double exact = quad::integrate_upper_tail(
      [&](double y) { return f3_density(g, p, y); }, threshold, 1e-12);
  const bool far_enough = empirical >= 3.0 * gaussian;
  const bool direction = exact >= 3.0 * gaussian;
  const bool consistent = empirical > 0.6 * exact && empirical < 1.6 * exact;
  const bool pass = far_enough && direction && consistent;
  return {pass, "empirical/gaussian " + fmt(empirical / gaussian) + "x, exact/gaussian " +
                    fmt(exact / gaussian) + "x, empirical/exact " + fmt(empirical / exact)};
}

// ---------------------------------------------------------------- criterion 8
Verdict check_scheme_consistency() {
  const GFunction g(GFamily::power_diff, 1.0);
  const auto scenario = [](double sigma) {
    return MarketScenario(Signal::constant(1.02), Signal::constant(1.0), sigma, 0.0, 2.0,
                          1.0 / 32.0, 1.0);
  };
  const MarketScenario coarse = scenario(0.2);
  const MarketScenario fine = scenario(0.1);
  double lo = 1e300;
  double hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double gap_coarse = 0.0;
    double gap_fine = 0.0;
    const PricePath lp0 = simulate_path(coarse, g, Scheme::euler_logp, seed);
    const PricePath ep0 = simulate_path(coarse, g, Scheme::euler_p, seed);
    const PricePath lp1 = simulate_path(fine, g, Scheme::euler_logp, seed);
    const PricePath ep1 = simulate_path(fine, g, Scheme::euler_p, seed);
    for (std::size_t i = 0; i < lp0.log_prices.size(); ++i) {
      gap_coarse = std::max(gap_coarse, std::fabs(lp0.log_prices[i] - ep0.log_prices[i]));
      gap_fine = std::max(gap_fine, std::fabs(lp1.log_prices[i] - ep1.log_prices[i]));
    }
    const double factor = gap_coarse / gap_fine;
    lo = std::min(lo, factor);
    hi = std::max(hi, factor);
  }
  const bool pass = lo >= 3.0 && hi <= 5.0;
  return {pass, "pathwise gap shrink factor in [" + fmt(lo) + ", " + fmt(hi) +
                    "] over 10 seeds (band [3, 5])"};
}

// ---------------------------------------------------------------- criterion 9
Verdict check_volatility_estimator() {
  const GFunction g(GFamily::power_diff, 1.0);
  const double sigma = 0.1;
  const double r = 1.2;
  const MarketScenario scenario(Signal::constant(r), Signal::constant(1.0), sigma, 0.0, 8.0,
                                1.0 / 128.0, 1.0);
  const PathEnsemble ensemble = simulate_ensemble(scenario, g, Scheme::euler_logp, 1234, 100);
  const VolatilitySeries series =
      estimate_volatility_ensemble(ensemble, {64, 64, VolatilityMode::vlog});
  double mean = 0.0;
  for (double e : series.estimates) mean += e;
  mean /= static_cast<double>(series.estimates.size());
  const double base = sigma * g.prime(r) * r;
  const double expected = base * base;
  const double rel = std::fabs(mean - expected) / expected;
  if (rel > 0.05) {
    return {false, "ensemble vlog off by " + fmt(rel) + " relative (cap 0.05)"};
  }

  PathEnsemble scaled = ensemble;
  for (auto& path : scaled.prices) {
    for (double& v : path) v *= 4.0;
  }
  double worst_equiv = 0.0;
  const auto vp0 = estimate_volatility_ensemble(ensemble, {64, 64, VolatilityMode::vp});
  const auto vp1 = estimate_volatility_ensemble(scaled, {64, 64, VolatilityMode::vp});
  const auto vpn0 = estimate_volatility_ensemble(ensemble, {64, 64, VolatilityMode::vpn});
  const auto vpn1 = estimate_volatility_ensemble(scaled, {64, 64, VolatilityMode::vpn});
  for (std::size_t i = 0; i < vp0.estimates.size(); ++i) {
    worst_equiv = std::max(
        worst_equiv, std::fabs(vp1.estimates[i] - 16.0 * vp0.estimates[i]) /
                         (16.0 * vp0.estimates[i]));
    worst_equiv = std::max(worst_equiv, std::fabs(vpn1.estimates[i] - vpn0.estimates[i]) /
                                            vpn0.estimates[i]);
  }
  const bool pass = worst_equiv <= 1e-14;
  return {pass, "vlog within " + fmt(rel) + " of theory; scale-equivariance residual " +
                    fmt(worst_equiv)};
}

// --------------------------------------------------------------- criterion 10
Verdict check_extrema_alignment() {
  const GFunction g(GFamily::power_diff, 1.0);
  const MarketScenario scenario(Signal::sinusoid(1.0, 0.3, 4.0), Signal::constant(1.0), 0.1,
                                0.0, 8.0, 1.0 / 128.0, 1.0);
  const PathEnsemble ensemble = simulate_ensemble(scenario, g, Scheme::euler_logp, 777, 200);
  const VolatilityConfig cfg(64, 64, VolatilityMode::vlog);
  VolatilitySeries series = estimate_volatility_ensemble(ensemble, cfg);
  attach_theory(&series, scenario, g);
  const ExtremaReport report = extrema_report(ensemble, series);

  if (report.price_extrema_times.empty() || report.vol_min_times.empty()) {
    return {false, "no usable extrema found"};
  }
  const double window_span = 64.0 / 128.0;
  double worst = 0.0;
  for (double vt : report.vol_min_times) {
    double nearest = 1e300;
    for (double pt : report.price_extrema_times) {
      nearest = std::min(nearest, std::fabs(vt - pt));
    }
    worst = std::max(worst, nearest);
  }
  const bool aligned = worst <= window_span;
  const bool correlated = report.rank_correlation >= 0.5;
  return {aligned && correlated,
          "worst vol-min offset " + fmt(worst) + " (cap " + fmt(window_span) +
              "), rank correlation " + fmt(report.rank_correlation)};
}

// --------------------------------------------------------------- criterion 11
std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict check_thread_determinism() {
  const char* cli = std::getenv("SDLAB_CLI_PATH");
#ifdef SDLAB_CLI_PATH
  if (!cli) cli = SDLAB_CLI_PATH;
#endif
  if (!cli) {
    return {false, "SDLAB_CLI_PATH not set; cannot drive the CLI"};
  }
  const fs::path root = fs::temp_directory_path() / "sdlab_acceptance_threads";
  fs::remove_all(root);
  fs::create_directories(root);

  struct Job {
    const char* name;
    const char* command;
    std::string config;
    std::vector<const char*> artifacts;
  };
  const std::vector<Job> jobs = {
      {"density", "density",
       "sigma = 0.1\ndt = 1\nd_over_s = 1.2\ndensity.points = 4001\n",
       {"f3.csv", "f3n.csv"}},
      {"sample", "sample",
       "sigma = 0.1\ndt = 1\nd_over_s = 1.2\nn = 200000\nseed = 7\n",
       {"values.csv", "histogram.csv"}},
      {"simulate", "simulate",
       "scenario.demand.value = 1.2\nsigma = 0.2\nt_end = 2\ndt_step = 0.015625\n"
       "paths = 8\nseed = 5\n",
       {"path.csv", "ensemble_mean.csv"}},
      {"volatility", "volatility",
       "scenario.demand.value = 1.2\nsigma = 0.2\nt_end = 4\ndt_step = 0.03125\n"
       "volatility.window = 32\npaths = 8\nseed = 5\n",
       {"volatility.csv"}}};

  for (const auto& job : jobs) {
    const fs::path cfg_path = root / (std::string(job.name) + ".cfg");
    {
      std::ofstream out(cfg_path);
      out << job.config;
    }
    const fs::path out1 = root / (std::string(job.name) + "_t1");
    const fs::path out8 = root / (std::string(job.name) + "_t8");
    for (const auto& [threads, dir] :
         std::vector<std::pair<const char*, const fs::path*>>{{"1", &out1}, {"8", &out8}}) {
      const std::string cmd = std::string("\"") + cli + "\" " + job.command + " --config \"" +
                              cfg_path.string() + "\" --output-dir \"" + dir->string() +
                              "\" --threads " + threads + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
        return {false, std::string(job.name) + " run failed under --threads " + threads};
      }
    }
    for (const char* artifact : job.artifacts) {
      if (slurp(out1 / artifact) != slurp(out8 / artifact)) {
        return {false, std::string(job.name) + "/" + artifact +
                           " differs between thread counts 1 and 8"};
      }
    }
  }
  fs::remove_all(root);
  return {true, "density, sample, simulate, volatility CSVs byte-identical at 1 and 8 threads"};
}

}  // namespace

int main() {
  struct Entry {
    int number;
    const char* name;
    Verdict (*check)();
  };
  const std::vector<Entry> entries = {
      {1, "price-response axioms", check_axioms},
      {2, "density normalization", check_normalization},
      {3, "surrogate error order", check_surrogate_order},
      {4, "noise-step scaling collapse", check_alpha_scaling},
      {5, "log-density curvature", check_curvature},
      {6, "sampler distribution match", check_sampler_match},
      {7, "fat tails", check_fat_tails},
      {8, "scheme consistency", check_scheme_consistency},
      {9, "volatility estimator", check_volatility_estimator},
      {10, "extrema alignment", check_extrema_alignment},
      {11, "thread determinism", check_thread_determinism},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Verdict verdict{false, ""};
    try {
      verdict = entry.check();
    } catch (const std::exception& e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    if (!verdict.pass) ++failures;
    std::printf("criterion %2d (%s): %s  %s\n", entry.number, entry.name,
                verdict.pass ? "PASS" : "FAIL", verdict.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n",
              static_cast<int>(entries.size()) - failures, static_cast<int>(entries.size()));
  return failures == 0 ? 0 : 1;
}
