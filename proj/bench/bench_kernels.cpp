// Compares the OpenMP kernels against their serial reference counterparts
// and verifies that both produce identical bytes while timing them.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdlab/density.hpp"
#include "sdlab/gfunc.hpp"
#include "sdlab/sampler.hpp"
#include "sdlab/sde.hpp"
#include "sdlab/volatility.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool bytes_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-24s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  identical %s\n", name,
              serial_s, parallel_s, serial_s / parallel_s, identical ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp not available; parallel kernels run serially\n");
#endif

  const sdlab::GFunction g(sdlab::GFamily::power_diff, 1.0);
  const sdlab::NoiseParams params(0.1, 1.0, 1.2);

  {
    const auto [lo, hi] = sdlab::default_range(&g, params, sdlab::DensityKind::f3);
    auto t0 = Clock::now();
    const auto serial =
        sdlab::tabulate_serial(&g, params, sdlab::DensityKind::f3, lo, hi, 2000000);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel = sdlab::tabulate(&g, params, sdlab::DensityKind::f3, lo, hi, 2000000);
    const double tp = seconds_since(t0);
    report("density.tabulate", ts, tp, bytes_equal(serial.fs, parallel.fs));
  }

  {
    auto t0 = Clock::now();
    const auto serial = sdlab::sample_price_changes_serial(g, params, 4000000, 42);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel = sdlab::sample_price_changes(g, params, 4000000, 42);
    const double tp = seconds_since(t0);
    report("sampler.draws", ts, tp, bytes_equal(serial.values, parallel.values));
  }

  {
    const sdlab::MarketScenario scenario(sdlab::Signal::constant(1.2),
                                         sdlab::Signal::constant(1.0), 0.1, 0.0, 4.0, 1.0 / 256,
                                         1.0);
    auto t0 = Clock::now();
    const auto serial =
        sdlab::simulate_ensemble_serial(scenario, g, sdlab::Scheme::euler_logp, 7, 400);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const auto parallel = sdlab::simulate_ensemble(scenario, g, sdlab::Scheme::euler_logp, 7, 400);
    const double tp = seconds_since(t0);
    bool identical = serial.prices.size() == parallel.prices.size();
    for (std::size_t i = 0; identical && i < serial.prices.size(); ++i) {
      identical = bytes_equal(serial.prices[i], parallel.prices[i]);
    }
    report("sde.ensemble", ts, tp, identical);

    const sdlab::VolatilityConfig cfg(64, 64, sdlab::VolatilityMode::vlog);
    t0 = Clock::now();
    const auto vs = sdlab::estimate_volatility_ensemble_serial(parallel, cfg);
    const double tvs = seconds_since(t0);
    t0 = Clock::now();
    const auto vp = sdlab::estimate_volatility_ensemble(parallel, cfg);
    const double tvp = seconds_since(t0);
    report("volatility.ensemble", tvs, tvp, bytes_equal(vs.estimates, vp.estimates));
  }

  return 0;
}
