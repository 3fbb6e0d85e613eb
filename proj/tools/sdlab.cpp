#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "sdlab/asymptotics.hpp"
#include "sdlab/config.hpp"
#include "sdlab/csv.hpp"
#include "sdlab/density.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/gfunc.hpp"
#include "sdlab/sampler.hpp"
#include "sdlab/sde.hpp"
#include "sdlab/version.hpp"
#include "sdlab/volatility.hpp"

namespace {

using nlohmann::json;
using namespace sdlab;

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string output_dir;
  bool have_seed = false;
  std::uint64_t seed = 0;
  std::string threads = "auto";
};

void print_usage(std::ostream& out) {
  out << "usage: sdlab <command> --config <file> [--output-dir <dir>] [--seed <u64>]"
      << " [--threads <n|auto>]\n"
      << "commands: density sample simulate volatility converge tails check-g\n";
}

CliArgs parse_args(int argc, char** argv) {
  CliArgs args;
  if (argc < 2) {
    throw ConfigError("cli: missing command");
  }
  args.command = argv[1];
  const std::set<std::string> commands = {"density",  "sample", "simulate", "volatility",
                                          "converge", "tails",  "check-g"};
  if (!commands.count(args.command)) {
    throw ConfigError("cli: unknown command '" + args.command + "'");
  }
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        throw ConfigError("cli: flag '" + flag + "' needs a value");
      }
      return argv[++i];
    };
    if (flag == "--config") {
      args.config_path = next();
    } else if (flag == "--output-dir") {
      args.output_dir = next();
    } else if (flag == "--seed") {
      const std::string v = next();
      char* end = nullptr;
      args.seed = std::strtoull(v.c_str(), &end, 10);
      if (end == v.c_str() || *end != '\0') {
        throw ConfigError("cli: --seed expects an unsigned integer, got '" + v + "'");
      }
      args.have_seed = true;
    } else if (flag == "--threads") {
      args.threads = next();
    } else {
      throw ConfigError("cli: unknown flag '" + flag + "'");
    }
  }
  if (args.config_path.empty()) {
    throw ConfigError("cli: --config is required");
  }
  return args;
}

// Records every key that shaped the run, with its final value, so the
// manifest echo reproduces the outputs byte for byte.
class Resolver {
 public:
  Resolver(const Config& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {}

  double real(const std::string& key) {
    require(key);
    const double v = cfg_.get_real(key);
    echo_[key] = cfg_.get_string(key);
    return v;
  }
  double real_or(const std::string& key, double fallback) {
    if (cfg_.has(key)) return real(key);
    echo_[key] = csvio::format_real(fallback);
    return fallback;
  }
  // For values whose default is derived from other keys: echoed only when
  // explicitly configured, so the manifest echo stays re-runnable.
  std::optional<double> optional_real(const std::string& key) {
    if (!cfg_.has(key)) return std::nullopt;
    return real(key);
  }
  long long int_or(const std::string& key, long long fallback) {
    if (cfg_.has(key)) {
      const long long v = cfg_.get_int(key);
      echo_[key] = cfg_.get_string(key);
      return v;
    }
    echo_[key] = std::to_string(fallback);
    return fallback;
  }
  std::string string_(const std::string& key) {
    require(key);
    echo_[key] = cfg_.get_string(key);
    return echo_[key];
  }
  std::string string_or(const std::string& key, const std::string& fallback) {
    const std::string v = cfg_.get_string_or(key, fallback);
    echo_[key] = v;
    return v;
  }
  bool bool_or(const std::string& key, bool fallback) {
    const bool v = cfg_.get_bool_or(key, fallback);
    echo_[key] = v ? "true" : "false";
    return v;
  }
  std::vector<double> real_list(const std::string& key) {
    require(key);
    const auto v = cfg_.get_real_list(key);
    echo_[key] = cfg_.get_string(key);
    return v;
  }
  bool has(const std::string& key) const { return cfg_.has(key); }
  void note(const std::string& key, const std::string& value) { echo_[key] = value; }

  const std::map<std::string, std::string>& echo() const { return echo_; }

 private:
  void require(const std::string& key) {
    if (!cfg_.has(key)) {
      throw ConfigError("config: command '" + command_ + "' requires key '" + key + "'");
    }
  }

  const Config& cfg_;
  std::string command_;
  std::map<std::string, std::string> echo_;
};

GFunction make_g(Resolver& r) {
  const std::string family = r.string_or("g.family", "power_diff");
  const double q = r.real_or("g.q", 1.0);
  return GFunction(g_family_from_string(family), q);
}

NoiseParams make_params(Resolver& r) {
  return NoiseParams(r.real("sigma"), r.real("dt"), r.real("d_over_s"));
}

const std::set<std::string> kGKeys = {"g.family", "g.q"};
const std::set<std::string> kScenarioKeys = {
    "scenario.demand.kind",   "scenario.demand.value", "scenario.demand.mean",
    "scenario.demand.amplitude", "scenario.demand.period", "scenario.demand.knots",
    "scenario.demand.file",   "scenario.supply.kind",  "scenario.supply.value",
    "scenario.supply.mean",   "scenario.supply.amplitude", "scenario.supply.period",
    "scenario.supply.knots",  "scenario.supply.file",  "sigma",
    "dt_step",                "p0",                    "t0",
    "t_end"};

std::set<std::string> with(std::set<std::string> base, const std::set<std::string>& extra) {
  base.insert(extra.begin(), extra.end());
  return base;
}

std::vector<std::pair<double, double>> parse_knots(const std::string& key,
                                                   const std::string& text) {
  std::vector<std::pair<double, double>> knots;
  size_t start = 0;
  while (start <= text.size()) {
    size_t semi = text.find(';', start);
    if (semi == std::string::npos) semi = text.size();
    const std::string piece = text.substr(start, semi - start);
    const size_t colon = piece.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config: key '" + key + "': expected t:value pairs separated by ';'");
    }
    char* end = nullptr;
    const std::string ts = piece.substr(0, colon);
    const std::string vs = piece.substr(colon + 1);
    const double t = std::strtod(ts.c_str(), &end);
    if (end == ts.c_str() || *end != '\0') {
      throw ConfigError("config: key '" + key + "': bad time '" + ts + "'");
    }
    const double v = std::strtod(vs.c_str(), &end);
    if (end == vs.c_str() || *end != '\0') {
      throw ConfigError("config: key '" + key + "': bad value '" + vs + "'");
    }
    knots.emplace_back(t, v);
    start = semi + 1;
  }
  return knots;
}

Signal make_signal(Resolver& r, const std::string& prefix) {
  const std::string kind = r.string_or(prefix + ".kind", "constant");
  if (kind == "constant") {
    return Signal::constant(r.real_or(prefix + ".value", 1.0));
  }
  if (kind == "sinusoid") {
    return Signal::sinusoid(r.real(prefix + ".mean"), r.real(prefix + ".amplitude"),
                            r.real(prefix + ".period"));
  }
  if (kind == "piecewise") {
    return Signal::piecewise(parse_knots(prefix + ".knots", r.string_(prefix + ".knots")));
  }
  if (kind == "csv") {
    return Signal::from_csv(r.string_(prefix + ".file"));
  }
  throw ConfigError("config: key '" + prefix + ".kind': unknown signal kind '" + kind + "'");
}

MarketScenario make_scenario(Resolver& r) {
  Signal demand = make_signal(r, "scenario.demand");
  Signal supply = make_signal(r, "scenario.supply");
  return MarketScenario(std::move(demand), std::move(supply), r.real("sigma"), r.real_or("t0", 0.0),
                        r.real("t_end"), r.real("dt_step"), r.real_or("p0", 1.0));
}

std::filesystem::path out_path(const std::string& dir, const std::string& name) {
  return std::filesystem::path(dir) / name;
}

std::function<double(double)> make_observable(const std::string& name) {
  if (name == "tanh") return [](double y) { return std::tanh(y); };
  if (name == "cauchy") return [](double y) { return 1.0 / (1.0 + y * y); };
  if (name == "quadratic") return [](double y) { return y * y; };
  throw ConfigError("config: key 'observable': unknown observable '" + name + "'");
}

struct CommandResult {
  json summary;
  std::vector<std::string> outputs;
  int exit_code = 0;
};

CommandResult run_check_g(Resolver& r, const std::string& outdir) {
  const GFunction g = make_g(r);
  const double lo = r.real_or("grid.lo", 0.05);
  const double hi = r.real_or("grid.hi", 20.0);
  const long long n = r.int_or("grid.points", 400);
  if (!(lo > 0.0) || !(hi > lo) || n < 8) {
    throw ConfigError("config: check-g grid needs 0 < grid.lo < grid.hi and grid.points >= 8");
  }
  const ConditionGReport report = check_condition_g(g, log_grid(lo, hi, static_cast<int>(n)));

  std::vector<std::vector<std::string>> rows;
  for (const auto& check : report.checks) {
    std::cout << "axiom " << check.name << ": " << (check.pass ? "pass" : "FAIL")
              << " (max violation " << csvio::format_real(check.max_violation) << ")\n";
    rows.push_back({check.name, check.pass ? "1" : "0", csvio::format_real(check.max_violation)});
  }
  const auto csv = out_path(outdir, "axioms.csv");
  csvio::write_rows(csv.string(), "axiom,pass,max_violation", rows);

  CommandResult result;
  result.outputs.push_back(csv.string());
  result.summary["all_pass"] = report.all_pass();
  result.summary["max_violation"] = report.max_violation();
  result.exit_code = report.all_pass() ? 0 : 2;
  return result;
}

CommandResult run_density(Resolver& r, const std::string& outdir) {
  const GFunction g = make_g(r);
  const NoiseParams params = make_params(r);
  const std::string kinds_text = r.string_or("density.kinds", "f3,f3n");
  const long long points = r.int_or("density.points", 2001);
  if (points < 2 || points > 20000000) {
    throw ConfigError("config: density.points must be in [2, 2e7]");
  }

  std::vector<DensityKind> kinds;
  size_t start = 0;
  while (start <= kinds_text.size()) {
    size_t comma = kinds_text.find(',', start);
    if (comma == std::string::npos) comma = kinds_text.size();
    kinds.push_back(density_kind_from_string(kinds_text.substr(start, comma - start)));
    start = comma + 1;
  }

  CommandResult result;
  json masses;
  const std::optional<double> y_min = r.optional_real("density.y_min");
  const std::optional<double> y_max = r.optional_real("density.y_max");
  for (DensityKind kind : kinds) {
    const auto [auto_lo, auto_hi] = default_range(&g, params, kind);
    const double lo = y_min.value_or(auto_lo);
    const double hi = y_max.value_or(auto_hi);
    const DensityCurve curve = tabulate(&g, params, kind, lo, hi, static_cast<int>(points));
    const std::string base = to_string(kind);
    const auto csv = out_path(outdir, base + ".csv");
    const auto sidecar = out_path(outdir, base + ".json");
    write_curve_csv(curve, csv.string());
    write_curve_sidecar(curve, sidecar.string());
    result.outputs.push_back(csv.string());
    result.outputs.push_back(sidecar.string());
    masses[base] = density_mass(&g, params, kind);
  }
  result.summary["mass"] = masses;
  return result;
}

CommandResult run_sample(Resolver& r, const std::string& outdir, std::uint64_t seed) {
  const GFunction g = make_g(r);
  const NoiseParams params = make_params(r);
  const long long n = r.int_or("n", 100000);
  if (n < 1) {
    throw ConfigError("config: n must be >= 1");
  }
  const std::string rho_text = r.string_or("rho", "anti");
  SampleBatch batch = [&] {
    if (rho_text == "anti") {
      return sample_price_changes(g, params, static_cast<std::size_t>(n), seed);
    }
    char* end = nullptr;
    const double rho = std::strtod(rho_text.c_str(), &end);
    if (end == rho_text.c_str() || *end != '\0') {
      throw ConfigError("config: key 'rho': expected a real in (-1, 1] or 'anti', got '" +
                        rho_text + "'");
    }
    return sample_price_changes_correlated(g, params, rho, static_cast<std::size_t>(n), seed);
  }();

  const auto values_csv = out_path(outdir, "values.csv");
  const auto sidecar = out_path(outdir, "values.json");
  write_batch_csv(batch, values_csv.string());
  write_batch_sidecar(batch, g, sidecar.string());

  CommandResult result;
  result.outputs.push_back(values_csv.string());
  result.outputs.push_back(sidecar.string());

  const long long bins = r.int_or("histogram.bins", 50);
  if (bins < 0) {
    throw ConfigError("config: histogram.bins must be >= 0");
  }
  if (bins > 0) {
    const auto hist_csv = out_path(outdir, "histogram.csv");
    write_histogram_csv(make_histogram(batch.values, static_cast<int>(bins)), hist_csv.string());
    result.outputs.push_back(hist_csv.string());
  }

  double mean = 0.0;
  for (double v : batch.values) mean += v;
  mean /= static_cast<double>(batch.values.size());
  double var = 0.0;
  for (double v : batch.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(batch.values.size());

  result.summary["n_requested"] = batch.n_requested;
  result.summary["n_rejected"] = batch.n_rejected;
  result.summary["mean"] = mean;
  result.summary["variance"] = var;
  return result;
}

CommandResult run_simulate(Resolver& r, const std::string& outdir, std::uint64_t seed) {
  const GFunction g = make_g(r);
  const MarketScenario scenario = make_scenario(r);
  const Scheme scheme = scheme_from_string(r.string_or("scheme", "euler_logp"));
  const long long paths = r.int_or("paths", 1);
  if (paths < 1) {
    throw ConfigError("config: paths must be >= 1");
  }

  CommandResult result;
  if (paths == 1) {
    const PricePath path = simulate_path(scenario, g, scheme, seed);
    const auto csv = out_path(outdir, "path.csv");
    write_path_csv(path, csv.string());
    result.outputs.push_back(csv.string());
    result.summary["final_price"] = path.prices.back();
    result.summary["n_steps"] = scenario.n_steps();
  } else {
    const PathEnsemble ensemble =
        simulate_ensemble(scenario, g, scheme, seed, static_cast<std::size_t>(paths));
    PricePath first;
    first.times = ensemble.times;
    first.prices = ensemble.prices.front();
    first.scheme = scheme;
    first.seed = seed;
    const auto path_csv = out_path(outdir, "path.csv");
    write_path_csv(first, path_csv.string());
    const auto mean_csv = out_path(outdir, "ensemble_mean.csv");
    write_ensemble_mean_csv(ensemble, mean_csv.string());
    result.outputs.push_back(path_csv.string());
    result.outputs.push_back(mean_csv.string());
    result.summary["final_mean_price"] = [&] {
      double sum = 0.0;
      for (const auto& p : ensemble.prices) sum += p.back();
      return sum / static_cast<double>(ensemble.prices.size());
    }();
    result.summary["n_steps"] = scenario.n_steps();
    result.summary["paths"] = paths;
  }
  return result;
}

CommandResult run_volatility(Resolver& r, const std::string& outdir, std::uint64_t seed) {
  const long long window = r.int_or("volatility.window", 64);
  const long long stride = r.int_or("volatility.stride", window);
  if (window < 2 || stride < 1) {
    throw ConfigError("config: volatility.window must be >= 2 and volatility.stride >= 1");
  }
  const VolatilityMode mode =
      volatility_mode_from_string(r.string_or("volatility.mode", "vlog"));
  const bool bessel = r.bool_or("variance.bessel", false);
  const VolatilityConfig cfg(static_cast<std::size_t>(window), static_cast<std::size_t>(stride),
                             mode, bessel);

  CommandResult result;
  VolatilitySeries series;
  if (r.has("input.file")) {
    const std::string file = r.string_("input.file");
    const PricePath path = ingest_prices(file);
    series = estimate_volatility(path, cfg);
  } else {
    const GFunction g = make_g(r);
    const MarketScenario scenario = make_scenario(r);
    const Scheme scheme = scheme_from_string(r.string_or("scheme", "euler_logp"));
    const long long paths = r.int_or("paths", 1);
    if (paths < 1) {
      throw ConfigError("config: paths must be >= 1");
    }
    const PathEnsemble ensemble =
        simulate_ensemble(scenario, g, scheme, seed, static_cast<std::size_t>(paths));
    series = estimate_volatility_ensemble(ensemble, cfg);
    attach_theory(&series, scenario, g);

    const ExtremaReport report = extrema_report(ensemble, series);
    json extrema;
    extrema["price_extrema_times"] = report.price_extrema_times;
    extrema["vol_min_times"] = report.vol_min_times;
    extrema["vol_max_times"] = report.vol_max_times;
    extrema["max_move_time"] = report.max_move_time;
    extrema["vol_peak_time"] = report.vol_peak_time;
    extrema["price_to_volmin_offsets"] = report.price_to_volmin_offsets;
    extrema["move_to_volmax_offset"] = report.move_to_volmax_offset;
    extrema["rank_correlation"] = report.rank_correlation;
    extrema["no_interior_extrema"] = report.no_interior_extrema;
    const auto extrema_path = out_path(outdir, "extrema.json");
    std::ofstream out(extrema_path, std::ios::binary);
    out << extrema.dump(2) << '\n';
    if (!out) {
      throw std::runtime_error("cli: cannot write '" + extrema_path.string() + "'");
    }
    result.outputs.push_back(extrema_path.string());
  }

  const auto vol_csv = out_path(outdir, "volatility.csv");
  write_volatility_csv(series, vol_csv.string());
  result.outputs.push_back(vol_csv.string());
  result.summary["n_windows"] = series.centers.size();
  result.summary["dropped_windows"] = series.dropped_windows;
  result.summary["overlapping"] = series.overlapping;
  return result;
}

CommandResult run_converge(Resolver& r, const std::string& outdir) {
  const GFunction g = make_g(r);
  const std::vector<double> sigmas = r.real_list("sigmas");
  const double dt = r.real("dt");
  const double d_over_s = r.real("d_over_s");
  const bool alpha = r.bool_or("alpha_scaling", false);
  const auto observable = make_observable(r.string_or("observable", "tanh"));
  const NoiseParams base(sigmas.front(), dt, d_over_s);

  const ConvergenceResult plain = convergence_experiment(observable, g, base, sigmas, false);
  auto write_points = [&](const ConvergenceResult& res, const std::string& name) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : res.points) {
      rows.push_back({csvio::format_real(pt.sigma), csvio::format_real(pt.dt),
                      csvio::format_real(pt.abs_error)});
    }
    const auto csv = out_path(outdir, name);
    csvio::write_rows(csv.string(), "sigma,dt,abs_error", rows);
    return csv.string();
  };

  CommandResult result;
  result.outputs.push_back(write_points(plain, "convergence.csv"));
  result.summary["fitted_order"] = plain.fitted_order;
  result.summary["degenerate"] = plain.degenerate;

  if (alpha) {
    const ConvergenceResult scaled = convergence_experiment(observable, g, base, sigmas, true);
    result.outputs.push_back(write_points(scaled, "convergence_scaled.csv"));
    result.summary["fitted_order_scaled"] = scaled.fitted_order;
    const CollapseReport collapse = check_alpha_collapse(plain, scaled);
    json c;
    c["comparable"] = collapse.comparable;
    c["pass"] = collapse.pass;
    c["x_lo"] = collapse.x_lo;
    c["x_hi"] = collapse.x_hi;
    c["ratio_lo"] = collapse.ratio_lo;
    c["ratio_hi"] = collapse.ratio_hi;
    result.summary["collapse"] = c;
  }
  return result;
}

CommandResult run_tails(Resolver& r, const std::string& outdir, std::uint64_t seed) {
  const GFunction g = make_g(r);
  const NoiseParams params = make_params(r);
  const long long n = r.int_or("n", 1000000);
  if (n < 1) {
    throw ConfigError("config: n must be >= 1");
  }
  std::vector<double> multipliers{3.0, 4.0, 5.0};
  if (r.has("tails.multipliers")) {
    multipliers = r.real_list("tails.multipliers");
  } else {
    r.note("tails.multipliers", "3,4,5");
  }
  std::sort(multipliers.begin(), multipliers.end());

  const SampleBatch batch = sample_price_changes(g, params, static_cast<std::size_t>(n), seed);
  const double mode_y = f3_mode(g, params);
  const double std_y = f3n_std(g, params);
  std::vector<double> thresholds;
  for (double m : multipliers) thresholds.push_back(mode_y + m * std_y);
  const std::vector<TailPoint> points = tail_exceedance(batch, thresholds, g);

  std::vector<std::vector<std::string>> rows;
  json ratios = json::array();
  for (const auto& pt : points) {
    rows.push_back({csvio::format_real(pt.threshold), csvio::format_real(pt.empirical),
                    csvio::format_real(pt.gaussian)});
    json entry;
    entry["threshold"] = pt.threshold;
    entry["empirical"] = pt.empirical;
    entry["gaussian"] = pt.gaussian;
    entry["ratio"] = pt.gaussian > 0.0 ? pt.empirical / pt.gaussian : 0.0;
    ratios.push_back(entry);
  }
  const auto csv = out_path(outdir, "tails.csv");
  csvio::write_rows(csv.string(), "threshold,empirical,gaussian", rows);

  CommandResult result;
  result.outputs.push_back(csv.string());
  result.summary["points"] = ratios;
  result.summary["n_rejected"] = batch.n_rejected;
  return result;
}

std::set<std::string> allowed_keys(const std::string& command) {
  const std::set<std::string> common = {"seed"};
  if (command == "check-g") {
    return with(with(kGKeys, common), {"grid.lo", "grid.hi", "grid.points"});
  }
  if (command == "density") {
    return with(with(kGKeys, common),
                {"sigma", "dt", "d_over_s", "density.kinds", "density.points", "density.y_min",
                 "density.y_max"});
  }
  if (command == "sample") {
    return with(with(kGKeys, common),
                {"sigma", "dt", "d_over_s", "n", "rho", "histogram.bins"});
  }
  if (command == "simulate") {
    return with(with(with(kGKeys, common), kScenarioKeys), {"scheme", "paths"});
  }
  if (command == "volatility") {
    return with(with(with(kGKeys, common), kScenarioKeys),
                {"scheme", "paths", "volatility.window", "volatility.stride", "volatility.mode",
                 "variance.bessel", "input.file"});
  }
  if (command == "converge") {
    return with(with(kGKeys, common),
                {"sigmas", "dt", "d_over_s", "observable", "alpha_scaling"});
  }
  if (command == "tails") {
    return with(with(kGKeys, common),
                {"sigma", "dt", "d_over_s", "n", "tails.multipliers"});
  }
  throw ConfigError("cli: unknown command '" + command + "'");
}

int run(int argc, char** argv) {
  const CliArgs args = parse_args(argc, argv);
  const auto t_start = std::chrono::steady_clock::now();

  if (args.threads != "auto") {
    char* end = nullptr;
    const long n = std::strtol(args.threads.c_str(), &end, 10);
    if (end == args.threads.c_str() || *end != '\0' || n < 1) {
      throw ConfigError("cli: --threads expects a positive integer or 'auto'");
    }
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
  }

  std::string outdir = args.output_dir;
  if (outdir.empty()) {
    if (const char* env = std::getenv("SDLAB_OUTPUT_DIR")) outdir = env;
  }
  if (outdir.empty()) outdir = ".";
  try {
    std::filesystem::create_directories(outdir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw ConfigError("cli: cannot create output directory '" + outdir + "': " + e.what());
  }

  const Config cfg = Config::from_file(args.config_path);
  cfg.require_known(allowed_keys(args.command), "command '" + args.command + "'");

  Resolver resolver(cfg, args.command);
  const std::uint64_t seed = args.have_seed ? args.seed : cfg.get_u64_or("seed", 1);
  resolver.note("seed", std::to_string(seed));

  CommandResult result;
  if (args.command == "check-g") {
    result = run_check_g(resolver, outdir);
  } else if (args.command == "density") {
    result = run_density(resolver, outdir);
  } else if (args.command == "sample") {
    result = run_sample(resolver, outdir, seed);
  } else if (args.command == "simulate") {
    result = run_simulate(resolver, outdir, seed);
  } else if (args.command == "volatility") {
    result = run_volatility(resolver, outdir, seed);
  } else if (args.command == "converge") {
    result = run_converge(resolver, outdir);
  } else if (args.command == "tails") {
    result = run_tails(resolver, outdir, seed);
  }

  const auto t_end = std::chrono::steady_clock::now();
  json manifest;
  manifest["command"] = args.command;
  manifest["version"] = version_string;
  manifest["seed"] = seed;
  manifest["threads"] = args.threads;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(t_end - t_start).count();
  manifest["config"] = resolver.echo();
  manifest["summary"] = result.summary;
  manifest["outputs"] = result.outputs;

  const auto manifest_path = out_path(outdir, "manifest.json");
  std::ofstream out(manifest_path, std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("cli: cannot write '" + manifest_path.string() + "'");
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (argc < 2) print_usage(std::cerr);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
