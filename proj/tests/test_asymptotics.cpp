#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sdlab/asymptotics.hpp"
#include "sdlab/density.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/gfunc.hpp"
#include "sdlab/sampler.hpp"

using namespace sdlab;

namespace {

GFunction power1() { return GFunction(GFamily::power_diff, 1.0); }

const auto kTanh = [](double y) { return std::tanh(y); };
const auto kCauchy = [](double y) { return 1.0 / (1.0 + y * y); };
const auto kOne = [](double) { return 1.0; };

}  // namespace

TEST_CASE("peak approximation is exact for a pure gaussian") {
  const auto res = laplace_approx(kOne, [](double z) { return -0.5 * z * z; }, 100.0);
  CHECK(res.value == doctest::Approx(0.25066282746310005).epsilon(1e-6));
  CHECK(res.peak_value == 0.0);
  CHECK(res.curvature == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("peak approximation error scales as one over a") {
  const auto h = [](double z) { return -0.5 * z * z; };
  {
    const double a = 400.0;
    const auto res = laplace_approx([](double z) { return std::cos(z); }, h, a);
    CHECK(res.value == doctest::Approx(0.12533141373155003).epsilon(1e-6));
    const double exact = 0.12517484733876733;
    CHECK(std::fabs(res.value - exact) / exact <= 1.0 / a);
  }
  for (double a : {100.0, 1000.0, 10000.0}) {
    for (int which = 0; which < 2; ++which) {
      const auto u = which == 0 ? std::function<double(double)>([](double z) { return std::cos(z); })
                                : std::function<double(double)>(kCauchy);
      const auto res = laplace_approx(u, h, a);
      const double exact = oracle::adaptive_simpson(
          [&](double z) { return u(z) * std::exp(a * h(z)); }, -1.0, 1.0, 1e-14);
      CHECK(std::fabs(res.value - exact) / std::fabs(exact) <= 2.0 / a);
    }
  }
}

TEST_CASE("flat peak is rejected") {
  CHECK_THROWS_AS(laplace_approx(kOne, [](double z) { return -z * z * z * z; }, 100.0),
                  NumericError);
}

TEST_CASE("kinked peak is flagged unstable") {
  CHECK_THROWS_AS(laplace_approx(kOne, [](double z) { return -std::fabs(z); }, 100.0),
                  NumericError);
}

TEST_CASE("invalid scale parameter") {
  CHECK_THROWS_AS(laplace_approx(kOne, [](double z) { return -0.5 * z * z; }, 0.0),
                  std::invalid_argument);
}

TEST_CASE("explicit step hint is honored") {
  const auto res =
      laplace_approx(kOne, [](double z) { return -0.5 * z * z; }, 100.0, 1e-2);
  CHECK(res.value == doctest::Approx(0.25066282746310005).epsilon(1e-6));
}

TEST_CASE("expectations under both densities") {
  const GFunction g = power1();
  const auto clipped = [](double y) { return std::clamp(y, -10.0, 10.0); };
  {
    const NoiseParams p(0.1, 1.0, 1.2);
    const auto cmp = expectation_error(kOne, g, p);
    CHECK(cmp.gaussian == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(cmp.exact == doctest::Approx(1.0).epsilon(1e-5));
  }
  {
    // odd bounded observable against the symmetric balanced-ratio law
    const NoiseParams p(0.1, 1.0, 1.0);
    const auto cmp = expectation_error(clipped, g, p);
    CHECK(std::fabs(cmp.exact) < 1e-6);
    CHECK(std::fabs(cmp.gaussian) < 1e-9);
  }
  {
    const GFunction go(GFamily::odd_power_diff, 3.0);
    const NoiseParams p(0.1, 1.0, 1.0);
    const auto cmp = expectation_error(clipped, go, p);
    CHECK(std::fabs(cmp.exact) < 1e-6);
  }
  {
    const NoiseParams p(0.1, 1.0, 1.0);
    CHECK(expectation_f3n([](double y) { return y * y; }, g, p) ==
          doctest::Approx(0.04).epsilon(1e-7));
  }
  {
    const NoiseParams p(0.1, 1.0, 1.2);
    CHECK(expectation_f3n(clipped, g, p) == doctest::Approx(g.value(1.2)).epsilon(1e-8));
    const auto cmp = expectation_error(clipped, g, p);
    CHECK(cmp.gaussian == doctest::Approx(g.value(1.2)).epsilon(1e-8));
  }
}

TEST_CASE("unbounded observables are rejected against the exact density") {
  const GFunction g = power1();
  const NoiseParams p(0.1, 1.0, 1.0);
  CHECK_THROWS_AS(expectation_f3([](double y) { return y; }, g, p), std::invalid_argument);
  CHECK_THROWS_AS(expectation_error([](double y) { return y * y; }, g, p),
                  std::invalid_argument);
  // the surrogate side has all moments and keeps accepting polynomial growth
  CHECK(expectation_f3n([](double y) { return y; }, g, p) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("exact expectation against a monte carlo oracle") {
  const GFunction g = power1();
  const NoiseParams p(0.05, 1.0, 1.2);
  const double quad_mean = expectation_f3(kTanh, g, p);
  const auto batch = sample_price_changes(g, p, 10'000'000, 96111);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double y : batch.values) {
    const double v = std::tanh(y);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(batch.values.size());
  const double mc_mean = sum / n;
  const double mc_se = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
  CHECK(std::fabs(quad_mean - mc_mean) <= 3.0 * mc_se);
}

TEST_CASE("frozen expectation differences") {
  const GFunction g = power1();
  struct Row {
    double sigma;
    double expected;
  };
  const std::vector<Row> tanh_rows = {
      {0.2, 0.00329186}, {0.1, 0.0013371}, {0.05, 0.000383255}, {0.025, 9.92694e-5}};
  for (const auto& row : tanh_rows) {
    const NoiseParams p(row.sigma, 1.0, 1.2);
    const auto cmp = expectation_error(kTanh, g, p);
    CHECK(cmp.abs_error == doctest::Approx(row.expected).epsilon(1e-4));
  }
  const std::vector<Row> cauchy_rows = {
      {0.2, 0.00345432}, {0.1, 0.000897807}, {0.05, 0.000247335}, {0.025, 6.43238e-5}};
  for (const auto& row : cauchy_rows) {
    const NoiseParams p(row.sigma, 1.0, 1.2);
    const auto cmp = expectation_error(kCauchy, g, p);
    CHECK(cmp.abs_error == doctest::Approx(row.expected).epsilon(1e-4));
  }
}

TEST_CASE("error halves by at least the order-two factor down the ladder") {
  const GFunction g = power1();
  auto run = [&](const std::function<double(double)>& obs, double sigma) {
    const NoiseParams p(sigma, 1.0, 1.2);
    return expectation_error(obs, g, p).abs_error;
  };
  for (int which = 0; which < 2; ++which) {
    const auto obs = which == 0 ? std::function<double(double)>(kTanh)
                                : std::function<double(double)>(kCauchy);
    double prev = run(obs, 0.1);
    for (double sigma : {0.05, 0.025}) {
      const double cur = run(obs, sigma);
      CHECK(cur <= 0.35 * prev);
      prev = cur;
    }
  }
}

TEST_CASE("ladder validation") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.2);
  CHECK_THROWS_AS(convergence_experiment(kTanh, g, base, {0.2, 0.1, 0.05}, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_experiment(kTanh, g, base, {0.2, 0.1, 0.05, 0.04}, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_experiment(kTanh, g, base, {0.2, 0.1, 0.1, 0.025}, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_experiment(kTanh, g, base, {0.2, 0.1, -0.05, 0.025}, false),
                  std::invalid_argument);
}

TEST_CASE("fitted order for a generic ratio") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.2);
  const auto res = convergence_experiment(kCauchy, g, base, {0.2, 0.1, 0.05, 0.025}, false);
  REQUIRE(res.points.size() == 4);
  CHECK_FALSE(res.degenerate);
  CHECK_FALSE(res.alpha_scaled);
  CHECK(res.points.front().sigma == 0.2);
  CHECK(res.points.back().sigma == 0.025);
  for (const auto& pt : res.points) CHECK(pt.dt == 1.0);
  CHECK(res.fitted_order == doctest::Approx(1.910066).epsilon(2e-3));
  CHECK(res.fitted_order > 1.7);
  CHECK(res.fitted_order < 2.3);
}

TEST_CASE("symmetric ratio is flagged degenerate") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.0);
  const auto res = convergence_experiment(kTanh, g, base, {0.2, 0.1, 0.05, 0.025}, false);
  CHECK(res.degenerate);
  CHECK(res.fitted_order == 0.0);
}

TEST_CASE("constant observable is flagged degenerate") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.2);
  const auto res = convergence_experiment(kOne, g, base, {0.2, 0.1, 0.05, 0.025}, false);
  for (const auto& pt : res.points) CHECK(pt.abs_error <= 1e-5);
  CHECK(res.degenerate);
}

TEST_CASE("step co-variation collapses onto the plain curve") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.2);
  const std::vector<double> sigmas = {0.2, 0.1, 0.05, 0.025};
  const auto plain = convergence_experiment(kCauchy, g, base, sigmas, false);
  const auto scaled = convergence_experiment(kCauchy, g, base, sigmas, true);
  CHECK(scaled.alpha_scaled);
  for (const auto& pt : scaled.points) {
    CHECK(pt.dt == doctest::Approx(base.dt * pt.sigma / 0.2).epsilon(1e-12));
  }
  const auto collapse = check_alpha_collapse(plain, scaled);
  CHECK(collapse.comparable);
  CHECK(collapse.pass);
  CHECK(collapse.x_hi > collapse.x_lo);
}

TEST_CASE("collapse check refuses degenerate inputs") {
  const GFunction g = power1();
  const NoiseParams base(0.2, 1.0, 1.0);
  const std::vector<double> sigmas = {0.2, 0.1, 0.05, 0.025};
  const auto degenerate = convergence_experiment(kTanh, g, base, sigmas, false);
  const auto report = check_alpha_collapse(degenerate, degenerate);
  CHECK_FALSE(report.comparable);
  CHECK_FALSE(report.pass);
}

TEST_CASE("log-density curvature identity") {
  struct Target {
    double r;
    double q;
    double rhs;
  };
  const std::vector<Target> targets = {
      {1.0, 1.0, -0.25}, {1.5, 1.0, -0.21301775147928994}, {1.2, 2.0, -0.054874464838475319}};
  for (const auto& t : targets) {
    const GFunction g(GFamily::power_diff, t.q);
    const NoiseParams p(0.05, 1.0, t.r);
    const auto check = verify_h1_curvature(g, p);
    CHECK(check.rhs == doctest::Approx(t.rhs).epsilon(1e-12));
    CHECK(std::fabs(check.lhs - check.rhs) / std::fabs(check.rhs) <= 1e-3);
    CHECK(check.abs_diff == doctest::Approx(std::fabs(check.lhs - check.rhs)).epsilon(1e-12));
  }
}
