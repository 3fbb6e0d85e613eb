#include "sdlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sdlab/csv.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/rng.hpp"

namespace sdlab {

namespace {

constexpr std::size_t kChunk = 65536;

// One attempt per index in [lo, hi); accepted values are appended in order.
// Each chunk owns counter-seeded substreams, so the concatenation over chunks
// is independent of scheduling.
std::uint64_t fill_chunk(const GFunction& g, const NoiseParams& params, double rho, bool anti,
                         std::size_t lo, std::size_t hi, std::uint64_t seed,
                         std::uint64_t chunk_index, std::vector<double>* out) {
  SplitStream demand_stream(seed, chunk_index, rng_domain::sampler);
  SplitStream supply_stream(seed, chunk_index, rng_domain::sampler_factor2);
  const double a = params.a();
  const double r = params.d_over_s;
  const double dt = params.dt;
  const double mix = anti ? 0.0 : std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::uint64_t rejected = 0;
  out->reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const double z1 = demand_stream.next_normal();
    const double z2 = supply_stream.next_normal();
    const double y_demand = z1;
    const double y_supply = anti ? -z1 : rho * z1 + mix * z2;
    const double num = 1.0 + a * y_demand;
    const double den = 1.0 + a * y_supply;
    if (num <= 0.0 || den <= 0.0) {
      ++rejected;
      continue;
    }
    out->push_back(g.value(r * num / den) * dt);
  }
  return rejected;
}

SampleBatch run_sampler(const GFunction& g, const NoiseParams& params, double rho, bool anti,
                        std::size_t n, std::uint64_t seed, bool parallel) {
  if (n == 0) {
    throw std::invalid_argument("sampler: n must be >= 1");
  }
  if (!anti && !(rho > -1.0 && rho <= 1.0)) {
    throw std::invalid_argument("sampler: rho must lie in (-1, 1]");
  }
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> parts(chunks);
  std::vector<std::uint64_t> rejects(chunks, 0);

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
      const std::size_t hi = std::min(n, lo + kChunk);
      rejects[static_cast<std::size_t>(c)] =
          fill_chunk(g, params, rho, anti, lo, hi, seed, static_cast<std::uint64_t>(c),
                     &parts[static_cast<std::size_t>(c)]);
    }
  } else {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(n, lo + kChunk);
      rejects[c] = fill_chunk(g, params, rho, anti, lo, hi, seed, c, &parts[c]);
    }
  }

  SampleBatch batch{{}, n, 0, seed, params, anti ? -1.0 : rho, anti};
  for (std::size_t c = 0; c < chunks; ++c) {
    batch.n_rejected += rejects[c];
    batch.values.insert(batch.values.end(), parts[c].begin(), parts[c].end());
  }
  const double fraction =
      static_cast<double>(batch.n_rejected) / static_cast<double>(batch.n_requested);
  if (fraction > 0.5) {
    throw NumericError("sampler: rejection fraction " + std::to_string(fraction) +
                       " exceeds 0.5 (sigma sqrt(dt) too large for the model regime)");
  }
  return batch;
}

}  // namespace

SampleBatch sample_price_changes(const GFunction& g, const NoiseParams& params, std::size_t n,
                                 std::uint64_t seed) {
  return run_sampler(g, params, -1.0, true, n, seed, true);
}

SampleBatch sample_price_changes_serial(const GFunction& g, const NoiseParams& params,
                                        std::size_t n, std::uint64_t seed) {
  return run_sampler(g, params, -1.0, true, n, seed, false);
}

SampleBatch sample_price_changes_correlated(const GFunction& g, const NoiseParams& params,
                                            double rho, std::size_t n, std::uint64_t seed) {
  return run_sampler(g, params, rho, false, n, seed, true);
}

SampleBatch sample_price_changes_correlated_serial(const GFunction& g, const NoiseParams& params,
                                                   double rho, std::size_t n,
                                                   std::uint64_t seed) {
  return run_sampler(g, params, rho, false, n, seed, false);
}

double delta_method_variance(const GFunction& g, const NoiseParams& params, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw std::invalid_argument("sampler: rho must lie in [-1, 1]");
  }
  const double base = f3n_std(g, params);
  return base * base * 0.5 * (1.0 - rho);
}

double TabulatedCdf::eval(double y) const {
  if (y <= ys.front()) return 0.0;
  if (y >= ys.back()) return 1.0;
  const auto it = std::upper_bound(ys.begin(), ys.end(), y);
  const std::size_t hi = static_cast<std::size_t>(it - ys.begin());
  const std::size_t lo = hi - 1;
  const double w = (y - ys[lo]) / (ys[hi] - ys[lo]);
  return cum[lo] + w * (cum[hi] - cum[lo]);
}

TabulatedCdf tabulate_exact_cdf(const GFunction& g, const NoiseParams& params, int n) {
  if (n < 100) {
    throw std::invalid_argument("sampler.cdf: need at least 100 tabulation points");
  }
  const double a = params.a();
  const double y_quant = std::min(8.5, 0.999 / a);
  const double r = params.d_over_s;
  const double x_lo = r * (1.0 - a * y_quant) / (1.0 + a * y_quant);
  const double x_hi = r * (1.0 + a * y_quant) / (1.0 - a * y_quant);
  const double lo = g.value(x_lo) * params.dt;
  const double hi = g.value(x_hi) * params.dt;

  TabulatedCdf cdf;
  cdf.ys.resize(static_cast<std::size_t>(n));
  std::vector<double> dens(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    cdf.ys[static_cast<std::size_t>(i)] = lo + step * i;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    // a grid point may land on the integrable pole of the odd family at y = 0
    const double d = f3_density(g, params, cdf.ys[static_cast<std::size_t>(i)]);
    dens[static_cast<std::size_t>(i)] = std::isfinite(d) ? d : 0.0;
  }
  cdf.cum.resize(static_cast<std::size_t>(n));
  cdf.cum[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    double next = cdf.cum[k - 1] + 0.5 * (dens[k - 1] + dens[k]) * step;
    if (next < cdf.cum[k - 1]) next = cdf.cum[k - 1];
    cdf.cum[k] = next;
  }
  const double total = cdf.cum.back();
  if (!(total > 0.0)) {
    throw NumericError("sampler.cdf: tabulated mass is not positive");
  }
  for (double& c : cdf.cum) c /= total;
  return cdf;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) {
    throw std::invalid_argument("sampler.ks: empty sample");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

DistanceReport ks_distance(const SampleBatch& batch, ReferenceDensity reference,
                           const GFunction& g) {
  if (batch.values.empty()) {
    throw std::invalid_argument("sampler.ks: batch has no accepted values");
  }
  double d = 0.0;
  if (reference == ReferenceDensity::gaussian) {
    const double m = f3_mode(g, batch.params);
    const double s = f3n_std(g, batch.params);
    d = ks_statistic(batch.values, [&](double y) { return normal_cdf((y - m) / s); });
  } else {
    const TabulatedCdf cdf = tabulate_exact_cdf(g, batch.params);
    d = ks_statistic(batch.values, [&](double y) { return cdf.eval(y); });
  }
  return {d, batch.values.size(), reference};
}

std::vector<TailPoint> tail_exceedance(const SampleBatch& batch,
                                       const std::vector<double>& thresholds,
                                       const GFunction& g) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw std::invalid_argument("sampler.tails: thresholds must be sorted ascending");
  }
  std::vector<double> sorted = batch.values;
  std::sort(sorted.begin(), sorted.end());
  const double m = f3_mode(g, batch.params);
  const double s = f3n_std(g, batch.params);
  std::vector<TailPoint> out;
  out.reserve(thresholds.size());
  for (double thr : thresholds) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), thr);
    const double empirical =
        static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
    const double gaussian = 0.5 * std::erfc((thr - m) / (s * std::sqrt(2.0)));
    out.push_back({thr, empirical, gaussian});
  }
  return out;
}

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) {
    throw std::invalid_argument("sampler.histogram: need at least one bin");
  }
  if (values.empty()) {
    throw std::invalid_argument("sampler.histogram: empty sample");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)] = {lo + width * b, lo + width * (b + 1), 0};
  }
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

void write_batch_csv(const SampleBatch& batch, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(batch.values.size());
  for (double v : batch.values) {
    rows.push_back({csvio::format_real(v)});
  }
  csvio::write_rows(path, "value", rows);
}

void write_batch_sidecar(const SampleBatch& batch, const GFunction& g, const std::string& path) {
  nlohmann::json j;
  j["family"] = to_string(g.family());
  j["q"] = g.q();
  j["sigma"] = batch.params.sigma;
  j["dt"] = batch.params.dt;
  j["d_over_s"] = batch.params.d_over_s;
  j["n_requested"] = batch.n_requested;
  j["n_rejected"] = batch.n_rejected;
  j["seed"] = batch.seed;
  if (batch.anti_correlated) {
    j["rho"] = "anti";
  } else {
    j["rho"] = batch.rho;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("sampler.sidecar: cannot open '" + path + "' for writing");
  }
  out << j.dump(2) << '\n';
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(bins.size());
  for (const auto& b : bins) {
    rows.push_back(
        {csvio::format_real(b.left), csvio::format_real(b.right), std::to_string(b.count)});
  }
  csvio::write_rows(path, "bin_left,bin_right,count", rows);
}

}  // namespace sdlab
