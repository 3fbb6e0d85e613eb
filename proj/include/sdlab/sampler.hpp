#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdlab/density.hpp"
#include "sdlab/gfunc.hpp"

namespace sdlab {

// One batch of Monte Carlo price-change draws. Attempts whose ratio argument
// fell outside the positive branch are dropped, not redrawn, so
// values.size() == n_requested - n_rejected. rho records the factor
// correlation; anti_correlated marks the baseline single-factor model (the
// supply factor is exactly the negated demand factor).
struct SampleBatch {
  std::vector<double> values;
  std::uint64_t n_requested = 0;
  std::uint64_t n_rejected = 0;
  std::uint64_t seed = 0;
  NoiseParams params;
  double rho = -1.0;
  bool anti_correlated = true;
};

// Baseline draw: one Gaussian factor drives demand up and supply down.
// Deterministic for a fixed seed under any thread count; attempts are cut
// into fixed chunks with counter-seeded substreams, concatenated in index
// order. Raises NumericError when more than half the attempts are rejected.
SampleBatch sample_price_changes(const GFunction& g, const NoiseParams& params, std::size_t n,
                                 std::uint64_t seed);
SampleBatch sample_price_changes_serial(const GFunction& g, const NoiseParams& params,
                                        std::size_t n, std::uint64_t seed);

// Two-factor draw with corr(Y1, Y2) = rho in (-1, 1]; the demand factor
// enters the numerator as +Y1 and the supply factor the denominator as +Y2,
// so rho -> -1 approaches the baseline model.
SampleBatch sample_price_changes_correlated(const GFunction& g, const NoiseParams& params,
                                            double rho, std::size_t n, std::uint64_t seed);
SampleBatch sample_price_changes_correlated_serial(const GFunction& g, const NoiseParams& params,
                                                   double rho, std::size_t n,
                                                   std::uint64_t seed);

// Small-noise prediction for Var[X3] at factor correlation rho (rho = -1 is
// the baseline and matches the Gaussian surrogate variance). Derived by the
// delta method and confirmed against brute-force sampling in the tests.
double delta_method_variance(const GFunction& g, const NoiseParams& params, double rho);

enum class ReferenceDensity { exact, gaussian };

struct DistanceReport {
  double ks_statistic;
  std::uint64_t n;
  ReferenceDensity reference;
};

// Kolmogorov-Smirnov distance between the batch and a reference CDF: the
// Gaussian surrogate in closed form, or the exact density via trapezoid
// tabulation.
DistanceReport ks_distance(const SampleBatch& batch, ReferenceDensity reference,
                           const GFunction& g);

struct TailPoint {
  double threshold;
  double empirical;  // P(X3 >= threshold) from the batch
  double gaussian;   // same tail under the Gaussian surrogate
};

// Per-threshold exceedance probabilities; thresholds must be sorted ascending.
std::vector<TailPoint> tail_exceedance(const SampleBatch& batch,
                                       const std::vector<double>& thresholds,
                                       const GFunction& g);

struct TabulatedCdf {
  std::vector<double> ys;
  std::vector<double> cum;

  double eval(double y) const;
};

// Trapezoid CDF of the exact per-step density on a uniform grid. The range is
// chosen from the Gaussian-factor quantile chain so the omitted mass is far
// below the tabulation error; the cumulative is forced monotone and
// normalized to end at exactly 1.
TabulatedCdf tabulate_exact_cdf(const GFunction& g, const NoiseParams& params, int n = 10000);

// Two-sided Kolmogorov-Smirnov distance between a sample and a reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

struct HistogramBin {
  double left;
  double right;
  std::uint64_t count;
};

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, int bins);

// values.csv (single `value` column) plus a JSON parameter sidecar; the
// histogram uses columns bin_left,bin_right,count.
void write_batch_csv(const SampleBatch& batch, const std::string& path);
void write_batch_sidecar(const SampleBatch& batch, const GFunction& g, const std::string& path);
void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::string& path);

}  // namespace sdlab
