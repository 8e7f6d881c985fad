#include <doctest.h>

#include <cmath>

#include "tamed/error_harness.hpp"
#include "tamed/errors.hpp"
#include "tamed/experiments.hpp"

using namespace tamed;

namespace {

StrongErrorConfig small_config() {
  StrongErrorConfig c;
  c.levels = {2, 3, 4, 5};
  c.samples = 400;
  c.seed = 21;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("self-comparison at the reference level is exactly zero") {
  StrongErrorConfig c = small_config();
  c.levels = {3, 6};
  c.reference_level = 6;
  const auto r = estimate_strong_error(c);
  REQUIRE(r.stats.size() == 2);
  CHECK(r.stats[1].level == 6);
  CHECK(r.stats[1].eta_error == 0.0);
  CHECK(r.stats[1].alpha_error == 0.0);
  CHECK(r.stats[0].eta_error > 0.0);
}

TEST_CASE("zero initial condition gives zero error everywhere") {
  StrongErrorConfig c = small_config();
  c.u0 = 0.0;
  const auto r = estimate_strong_error(c);
  for (const auto& s : r.stats) {
    CHECK(s.eta_error == 0.0);
    CHECK(s.alpha_error == 0.0);
    CHECK(s.ci_halfwidth == 0.0);
  }
  CHECK_THROWS_AS(fit_rate(r.stats, ErrorFunctional::kUniform, 0.1), UsageError);
}

TEST_CASE("errors shrink with the level and the coupling is exact") {
  StrongErrorConfig c = small_config();
  const auto r = estimate_strong_error(c);
  CHECK(r.reference_level == 9);
  for (std::size_t i = 1; i < r.stats.size(); ++i) {
    CHECK(r.stats[i].eta_error < r.stats[i - 1].eta_error);
    CHECK(r.stats[i].alpha_error < r.stats[i - 1].alpha_error);
  }
  for (const auto& s : r.stats) {
    CHECK(std::isfinite(s.eta_error));
    CHECK(s.blowup_count == 0);
    CHECK(s.samples == 400);
    CHECK(s.h == std::ldexp(1.0, -s.level));
    CHECK(s.ci_halfwidth > 0.0);
    CHECK(s.alpha_ci_halfwidth > 0.0);
  }
  CHECK(r.max_coupling_gap < 1e-12);
  REQUIRE(r.reference_check);
  CHECK(r.reference_check->level == 8);
  CHECK(r.reference_ratio_eta > 0.0);
}

TEST_CASE("sup-then-expectation dominates expectation-then-sup") {
  StrongErrorConfig c = small_config();
  c.eta = 0.5;
  c.alpha = 0.5;
  const auto r = estimate_strong_error(c);
  for (const auto& s : r.stats) CHECK(s.eta_error >= s.alpha_error);
}

TEST_CASE("results do not depend on the worker count") {
  StrongErrorConfig c = small_config();
  c.samples = 150;  // not a multiple of the chunk size
  const auto a = estimate_strong_error(c);
  c.workers = 4;
  const auto b = estimate_strong_error(c);
  CHECK(strong_error_csv(a.stats) == strong_error_csv(b.stats));
  CHECK(a.reference_ratio_alpha == b.reference_ratio_alpha);
}

TEST_CASE("blow-ups of the tested scheme are recorded") {
  StrongErrorConfig c = small_config();
  c.spec = SchemeSpec::naive_em();
  c.levels = {2, 3};
  c.reference_level = 6;
  c.u0 = 1000.0;  // 1e3 -> -2.5e8 -> 3.9e24 -> -1.5e73 -> beyond 1e150 at h = 1/4
  c.samples = 64;
  const auto r = estimate_strong_error(c);
  CHECK(r.stats[0].blowup_count == 64);
  CHECK(std::isfinite(r.stats[0].eta_error));
  CHECK(r.stats[0].eta_error > 1e100);
}

TEST_CASE("harness argument validation") {
  StrongErrorConfig c = small_config();
  c.eta = 1.0;
  CHECK_THROWS_AS(estimate_strong_error(c), UsageError);
  c = small_config();
  c.alpha = 2.0;
  CHECK_THROWS_AS(estimate_strong_error(c), UsageError);
  c = small_config();
  c.reference_level = 4;
  CHECK_THROWS_AS(estimate_strong_error(c), UsageError);
  c = small_config();
  c.levels.clear();
  CHECK_THROWS_AS(estimate_strong_error(c), UsageError);
}

TEST_CASE("fit_rate on synthetic data") {
  std::vector<double> h;
  std::vector<double> e1;
  std::vector<double> e2;
  for (int k = 4; k <= 8; ++k) {
    h.push_back(std::ldexp(1.0, -k));
    e1.push_back(std::sqrt(h.back()));
    e2.push_back(3.0 * std::pow(h.back(), 0.25));
  }
  const RateFit a = fit_loglog(h, e1, 0.1);
  CHECK(a.slope == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.theoretical_exponent == 0.1);
  CHECK(a.points == 5);
  const RateFit b = fit_loglog(h, e2, 0.0);
  CHECK(b.slope == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(b.intercept == doctest::Approx(std::log2(3.0)).epsilon(1e-13));

  e1[2] = 0.0;
  const RateFit c = fit_loglog(h, e1, 0.1);
  CHECK(c.points == 4);
  CHECK(c.warnings.size() == 1);
  CHECK(c.slope == doctest::Approx(0.5).epsilon(1e-14));
  e1[3] = 0.0;
  CHECK_THROWS_AS(fit_loglog(h, e1, 0.1), UsageError);

  std::vector<ErrorStats> stats;
  for (std::size_t i = 0; i < h.size(); ++i) {
    ErrorStats s;
    s.h = h[i];
    s.eta_error = e2[i];
    s.alpha_error = std::sqrt(h[i]);
    stats.push_back(s);
  }
  CHECK(fit_rate(stats, ErrorFunctional::kUniform, 0.0).slope == doctest::Approx(0.25));
  CHECK(fit_rate(stats, ErrorFunctional::kPointwise, 0.0).slope == doctest::Approx(0.5));
}
