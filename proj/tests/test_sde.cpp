#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdlab/errors.hpp"
#include "sdlab/gfunc.hpp"
#include "sdlab/sde.hpp"

using namespace sdlab;

namespace {

GFunction power1() { return GFunction(GFamily::power_diff, 1.0); }

MarketScenario constant_ratio(double ratio, double sigma, double span, double dt) {
  return MarketScenario(Signal::constant(ratio), Signal::constant(1.0), sigma, 0.0, span, dt, 1.0);
}

}  // namespace

TEST_CASE("signal kinds evaluate as documented") {
  const Signal c = Signal::constant(2.5);
  CHECK(c(0.0) == 2.5);
  CHECK(c(-3.0) == 2.5);
  CHECK(c.kind() == SignalKind::constant);

  const Signal s = Signal::sinusoid(1.0, 0.3, 4.0);
  CHECK(s(0.0) == doctest::Approx(1.0));
  CHECK(s(1.0) == doctest::Approx(1.3));
  CHECK(s(3.0) == doctest::Approx(0.7));
  CHECK(s.kind() == SignalKind::sinusoid);

  const Signal p = Signal::piecewise({{0.0, 1.0}, {2.0, 5.0}, {4.0, 2.0}});
  CHECK(p(-1.0) == 1.0);
  CHECK(p(1.9) == 1.0);
  CHECK(p(2.0) == 5.0);
  CHECK(p(3.0) == 5.0);
  CHECK(p(4.0) == 2.0);
  CHECK(p(10.0) == 2.0);

  const Signal tbl = Signal::from_table({{0.0, 1.0}, {2.0, 3.0}});
  CHECK(tbl(1.0) == doctest::Approx(2.0));
  CHECK(tbl(0.5) == doctest::Approx(1.5));
  CHECK(tbl(-5.0) == 1.0);
  CHECK(tbl(5.0) == 3.0);
  CHECK(tbl.kind() == SignalKind::csv);
}

TEST_CASE("signal construction errors") {
  CHECK_THROWS_AS(Signal::sinusoid(1.0, 0.3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Signal::piecewise({}), std::invalid_argument);
  CHECK_THROWS_AS(Signal::piecewise({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Signal::from_table({{1.0, 1.0}, {0.5, 2.0}}), std::invalid_argument);
}

TEST_CASE("signal csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "sdlab_sde_signal_test";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "signal.csv").string();
  {
    std::ofstream out(good);
    out << "t,value\n0,1\n2,3\n";
  }
  const Signal sig = Signal::from_csv(good);
  CHECK(sig(1.0) == doctest::Approx(2.0));

  const std::string bad = (dir / "bad.csv").string();
  {
    std::ofstream out(bad);
    out << "time,value\n0,1\n";
  }
  CHECK_THROWS_WITH_AS(Signal::from_csv(bad),
                       doctest::Contains("line 1: expected header 't,value'"),
                       std::runtime_error);
  CHECK_THROWS_AS(Signal::from_csv((dir / "missing.csv").string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario validation") {
  const Signal one = Signal::constant(1.0);
  CHECK_THROWS_AS(MarketScenario(one, one, -0.1, 0.0, 1.0, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MarketScenario(one, one, 0.1, 0.0, 1.0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MarketScenario(one, one, 0.1, 1.0, 1.0, 0.1, 1.0), std::invalid_argument);
  // coarser than a tenth of the horizon
  CHECK_THROWS_AS(MarketScenario(one, one, 0.1, 0.0, 1.0, 0.2, 1.0), std::invalid_argument);
  // horizon not a multiple of the step
  CHECK_THROWS_WITH_AS(MarketScenario(one, one, 0.1, 0.0, 1.0, 0.03, 1.0),
                       doctest::Contains("integer multiple"), std::invalid_argument);
  // a signal that dips non-positive inside the horizon
  const Signal dip = Signal::sinusoid(0.5, 1.0, 4.0);
  CHECK_THROWS_WITH_AS(MarketScenario(dip, one, 0.1, 0.0, 8.0, 0.5, 1.0),
                       doctest::Contains("demand signal must be positive"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(MarketScenario(one, dip, 0.1, 0.0, 8.0, 0.5, 1.0),
                       doctest::Contains("supply signal must be positive"), std::invalid_argument);

  const MarketScenario ok(one, one, 0.1, 0.0, 8.0, 1.0 / 128.0, 1.0);
  CHECK(ok.n_steps() == 1024);
  CHECK(ok.ratio(3.7) == 1.0);
}

TEST_CASE("scheme names round trip") {
  for (Scheme s : {Scheme::euler_p, Scheme::euler_logp, Scheme::sym_p,
                   Scheme::discrete_tatonnement, Scheme::ingested}) {
    CHECK(scheme_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(scheme_from_string("heun"), std::invalid_argument);
}

TEST_CASE("simulate rejects non-stepping schemes") {
  const auto scenario = constant_ratio(1.2, 0.1, 1.0, 0.1);
  CHECK_THROWS_AS(simulate_path(scenario, power1(), Scheme::discrete_tatonnement, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(scenario, power1(), Scheme::ingested, 1), std::invalid_argument);
}

TEST_CASE("path layout and positivity of the log formulation") {
  const auto scenario = constant_ratio(1.2, 3.0, 2.0, 0.1);
  const auto path = simulate_path(scenario, power1(), Scheme::euler_logp, 7);
  REQUIRE(path.times.size() == 21);
  REQUIRE(path.prices.size() == 21);
  REQUIRE(path.log_prices.size() == 21);
  CHECK(path.times.front() == 0.0);
  CHECK(path.times.back() == doctest::Approx(2.0));
  CHECK(path.prices.front() == 1.0);
  CHECK(path.scheme == Scheme::euler_logp);
  CHECK(path.seed == 7);
  for (std::size_t i = 0; i < path.prices.size(); ++i) {
    CHECK(path.prices[i] > 0.0);
    CHECK(std::isfinite(path.log_prices[i]));
    CHECK(path.prices[i] == std::exp(path.log_prices[i]));
  }
}

TEST_CASE("deterministic limit matches the closed-form flow") {
  const double r = 1.2;
  const auto scenario = constant_ratio(r, 0.0, 2.0, 0.05);
  const GFunction g = power1();
  const auto det = deterministic_path(scenario, g);
  const auto path = simulate_path(scenario, g, Scheme::euler_logp, 99);
  REQUIRE(det.size() == path.prices.size());
  for (std::size_t i = 0; i < det.size(); ++i) CHECK(det[i] == path.prices[i]);
  // constant ratio integrates exactly even on a coarse grid
  CHECK(det.back() == doctest::Approx(std::exp(g.value(r) * 2.0)).epsilon(1e-12));
}

TEST_CASE("symmetrized coefficients reproduce the plain price stepping") {
  for (double q : {1.0, 2.0}) {
    const GFunction g(GFamily::power_diff, q);
    const auto scenario = constant_ratio(1.15, 0.1, 2.0, 0.02);
    const auto plain = simulate_path(scenario, g, Scheme::euler_p, 31);
    const auto sym = simulate_path(scenario, g, Scheme::sym_p, 31);
    REQUIRE(plain.prices.size() == sym.prices.size());
    for (std::size_t i = 0; i < plain.prices.size(); ++i) {
      CAPTURE(q);
      CAPTURE(i);
      CHECK(sym.prices[i] == doctest::Approx(plain.prices[i]).epsilon(1e-10));
    }
  }
  const GFunction odd(GFamily::odd_power_diff, 3.0);
  const auto scenario = constant_ratio(1.05, 0.05, 2.0, 0.02);
  const auto plain = simulate_path(scenario, odd, Scheme::euler_p, 5);
  const auto sym = simulate_path(scenario, odd, Scheme::sym_p, 5);
  for (std::size_t i = 0; i < plain.prices.size(); ++i) {
    CHECK(sym.prices[i] == doctest::Approx(plain.prices[i]).epsilon(1e-10));
  }
}

TEST_CASE("schemes draw the same Brownian increment at each step") {
  const double r = 1.2;
  const double sigma = 0.1;
  const double dt = 0.05;
  const auto scenario = constant_ratio(r, sigma, 1.0, dt);
  const GFunction g = power1();
  const auto lp = simulate_path(scenario, g, Scheme::euler_logp, 17);
  const auto ep = simulate_path(scenario, g, Scheme::euler_p, 17);
  const double drift = g.value(r);
  const double diffusion = sigma * g.prime(r) * r;
  for (std::size_t k = 0; k < 20; ++k) {
    const double dw_lp =
        (lp.log_prices[k + 1] - lp.log_prices[k] - (drift - 0.5 * diffusion * diffusion) * dt) /
        diffusion;
    const double dw_ep =
        (ep.prices[k + 1] / ep.prices[k] - 1.0 - drift * dt) / diffusion;
    CHECK(dw_lp == doctest::Approx(dw_ep).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("formulation gap shrinks like sigma squared") {
  const auto base = constant_ratio(1.05, 0.2, 2.0, 1.0 / 32.0);
  const auto half = constant_ratio(1.05, 0.1, 2.0, 1.0 / 32.0);
  const GFunction g = power1();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    double gap_base = 0.0;
    double gap_half = 0.0;
    const auto lp0 = simulate_path(base, g, Scheme::euler_logp, seed);
    const auto ep0 = simulate_path(base, g, Scheme::euler_p, seed);
    const auto lp1 = simulate_path(half, g, Scheme::euler_logp, seed);
    const auto ep1 = simulate_path(half, g, Scheme::euler_p, seed);
    for (std::size_t i = 0; i < lp0.prices.size(); ++i) {
      gap_base = std::max(gap_base, std::fabs(lp0.log_prices[i] - ep0.log_prices[i]));
      gap_half = std::max(gap_half, std::fabs(lp1.log_prices[i] - ep1.log_prices[i]));
    }
    CAPTURE(seed);
    CHECK(gap_base > 0.0);
    const double factor = gap_base / gap_half;
    CHECK(factor > 2.5);
    CHECK(factor < 6.0);
  }
}

TEST_CASE("plain price stepping aborts when a step crosses zero") {
  const auto scenario = constant_ratio(1.0, 40.0, 1.0, 0.05);
  try {
    simulate_path(scenario, power1(), Scheme::euler_p, 1);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("euler_p price became non-positive at step") !=
          std::string::npos);
  }
}

TEST_CASE("ensemble is deterministic and consistent with single paths") {
  const auto scenario = constant_ratio(1.2, 0.2, 1.0, 0.05);
  const GFunction g = power1();
  const auto par = simulate_ensemble(scenario, g, Scheme::euler_logp, 11, 16);
  const auto ser = simulate_ensemble_serial(scenario, g, Scheme::euler_logp, 11, 16);
  REQUIRE(par.prices.size() == 16);
  REQUIRE(ser.prices.size() == 16);
  for (std::size_t k = 0; k < 16; ++k) {
    REQUIRE(par.prices[k].size() == ser.prices[k].size());
    for (std::size_t i = 0; i < par.prices[k].size(); ++i) {
      CHECK(par.prices[k][i] == ser.prices[k][i]);
    }
  }
  const auto single = simulate_path(scenario, g, Scheme::euler_logp, 11);
  for (std::size_t i = 0; i < single.prices.size(); ++i) {
    CHECK(par.prices[0][i] == single.prices[i]);
  }
  bool paths_differ = false;
  for (std::size_t i = 0; i < par.prices[0].size() && !paths_differ; ++i) {
    paths_differ = par.prices[0][i] != par.prices[1][i];
  }
  CHECK(paths_differ);
  CHECK_THROWS_AS(simulate_ensemble(scenario, g, Scheme::euler_logp, 11, 0),
                  std::invalid_argument);
}

TEST_CASE("tatonnement variants") {
  const std::vector<double> d2 = {2.0, 2.0, 2.0};
  const std::vector<double> s1 = {1.0, 1.0, 1.0};

  const auto raw = discrete_tatonnement(1.0, d2, s1, 1.0, TatonnementVariant::raw);
  REQUIRE(raw.size() == 4);
  CHECK(raw[0] == 1.0);
  CHECK(raw[1] == 2.0);
  CHECK(raw[3] == 4.0);

  try {
    discrete_tatonnement(1.0, {1.0}, {3.0}, 1.0, TatonnementVariant::raw);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("raw variant price became non-positive at step 1") !=
          std::string::npos);
  }

  const auto norm = discrete_tatonnement(1.0, d2, s1, 1.0, TatonnementVariant::normalized);
  CHECK(norm[1] == doctest::Approx(2.0));
  CHECK(norm[2] == doctest::Approx(4.0));
  // relative recursion is unit-invariant; raw is not
  const std::vector<double> d_big = {2000.0, 2000.0, 2000.0};
  const std::vector<double> s_big = {1000.0, 1000.0, 1000.0};
  const auto norm_big = discrete_tatonnement(1.0, d_big, s_big, 1.0, TatonnementVariant::normalized);
  for (std::size_t i = 0; i < norm.size(); ++i) CHECK(norm[i] == norm_big[i]);
  // same -50% relative excess: raw survives in small units, dies in big ones
  CHECK_NOTHROW(discrete_tatonnement(1.0, {0.5}, {1.0}, 1.0, TatonnementVariant::raw));
  CHECK_THROWS_AS(discrete_tatonnement(1.0, {500.0}, {1000.0}, 1.0, TatonnementVariant::raw),
                  NumericError);

  const GFunction g = power1();
  const auto nl = discrete_tatonnement(1.0, d2, s1, 2.0, TatonnementVariant::nonlinear, &g);
  const double growth = 1.0 + g.value(2.0) / 2.0;
  CHECK(nl[1] == doctest::Approx(growth));
  CHECK(nl[3] == doctest::Approx(growth * growth * growth));

  CHECK_THROWS_AS(discrete_tatonnement(1.0, d2, s1, 1.0, TatonnementVariant::nonlinear),
                  std::invalid_argument);
  CHECK_THROWS_AS(discrete_tatonnement(1.0, {}, {}, 1.0, TatonnementVariant::raw),
                  std::invalid_argument);
  CHECK_THROWS_AS(discrete_tatonnement(1.0, d2, s1, 0.0, TatonnementVariant::raw),
                  std::invalid_argument);
  CHECK_THROWS_AS(discrete_tatonnement(0.0, d2, s1, 1.0, TatonnementVariant::raw),
                  std::invalid_argument);
  CHECK_THROWS_AS(discrete_tatonnement(1.0, {1.0, 1.0}, {1.0}, 1.0, TatonnementVariant::raw),
                  std::invalid_argument);
  CHECK_THROWS_AS(discrete_tatonnement(1.0, d2, {1.0, 0.0, 1.0}, 1.0, TatonnementVariant::raw),
                  std::invalid_argument);
}

TEST_CASE("affine curves intersect where expected") {
  const SupplyDemandCurves curves(10.0, -2.0, 1.0, 1.0);
  CHECK(intersect_curves(curves) == doctest::Approx(3.0));
  CHECK_THROWS_AS(SupplyDemandCurves(10.0, 2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SupplyDemandCurves(10.0, -2.0, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(SupplyDemandCurves(1.0, -2.0, 10.0, 1.0), std::invalid_argument);
}

TEST_CASE("path csv export") {
  const auto scenario = constant_ratio(1.2, 0.1, 1.0, 0.1);
  const GFunction g = power1();
  const auto path = simulate_path(scenario, g, Scheme::euler_logp, 3);
  const auto dir = std::filesystem::temp_directory_path() / "sdlab_sde_csv_test";
  std::filesystem::create_directories(dir);
  const std::string single = (dir / "path.csv").string();
  write_path_csv(path, single);
  std::ifstream in(single);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,price");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == path.times.size());

  // a two-path ensemble of identical seeds averages to the path itself
  auto ensemble = simulate_ensemble(scenario, g, Scheme::euler_logp, 3, 2);
  ensemble.prices[1] = ensemble.prices[0];
  const std::string mean = (dir / "mean.csv").string();
  write_ensemble_mean_csv(ensemble, mean);
  std::ifstream mean_in(mean);
  std::getline(mean_in, header);
  CHECK(header == "t,price");
  std::string first_row;
  std::getline(mean_in, first_row);
  CHECK(first_row == "0,1");
  std::filesystem::remove_all(dir);
}
