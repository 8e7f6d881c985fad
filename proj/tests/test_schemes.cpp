#include <doctest.h>

#include <cmath>
#include <random>

#include "tamed/coefficients.hpp"
#include "tamed/errors.hpp"
#include "tamed/schemes.hpp"

using namespace tamed;

namespace {

std::vector<SchemeSpec> all_schemes() {
  return {SchemeSpec::naive_em(), SchemeSpec::weak_tamed(), SchemeSpec::regularized_em(0.3),
          SchemeSpec::drift_tamed(), SchemeSpec::increment_tamed()};
}

BrownianPath zero_path(const TimeGrid& g) {
  return BrownianPath(g, std::vector<double>(static_cast<std::size_t>(g.steps()), 0.0), 0, 0);
}

}  // namespace

TEST_CASE("step examples") {
  CHECK(step(SchemeSpec::weak_tamed(), 1.0, 1.0, 0.0) == 0.5);
  CHECK(step(SchemeSpec::naive_em(), 10.0, 0.1, 0.0) == doctest::Approx(-90.0).epsilon(1e-15));
  CHECK(step(SchemeSpec::weak_tamed(), 2.0, 0.25, 0.5) == 2.0);
  CHECK(step(SchemeSpec::weak_tamed(), 1.0, 0.5, 0.3) == doctest::Approx(0.8666666666666667).epsilon(1e-15));
  for (const auto& s : all_schemes()) {
    CHECK(step(s, 0.0, 0.1, 0.7) == 0.0);
    CHECK_THROWS_AS(step(s, 1.0, 0.0, 0.1), DomainError);
  }
  // comparators
  CHECK(step(SchemeSpec::drift_tamed(), 2.0, 0.5, 0.0) == doctest::Approx(2.0 - 0.5 * 8.0 / 5.0));
  CHECK(step(SchemeSpec::increment_tamed(), 2.0, 0.5, 0.0) == 1.0);
  CHECK(step(SchemeSpec::increment_tamed(), 0.5, 0.1, 0.1) == doctest::Approx(0.5 - 0.0125 + 0.025));
}

TEST_CASE("scheme names round-trip") {
  for (const auto& s : all_schemes()) CHECK(SchemeSpec::parse(s.name()) == s);
  CHECK(SchemeSpec::parse("regularized-em:0.001").epsilon_for(0.5) == 0.001);
  CHECK(SchemeSpec::weak_tamed().epsilon_for(0.125) == 0.125);
  CHECK(SchemeSpec::naive_em().epsilon_for(0.125) == 0.0);
  CHECK_THROWS_AS(SchemeSpec::parse("euler"), UsageError);
  CHECK_THROWS_AS(SchemeSpec::parse("regularized-em:abc"), UsageError);
  CHECK_THROWS_AS(SchemeSpec::parse("regularized-em:0.1x"), UsageError);
  CHECK_THROWS_AS(SchemeSpec::regularized_em(0.0), DomainError);
}

TEST_CASE("deterministic contraction of the weak-tamed map") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> m(-4.0, 4.0);
  for (int i = 0; i < 20000; ++i) {
    const double u = (i % 2 ? -1 : 1) * std::pow(10.0, m(gen));
    const double h = std::pow(10.0, -3.0 * (i % 7) / 6.0);
    const double next = step(SchemeSpec::weak_tamed(), u, h, 0.0);
    REQUIRE(std::fabs(next) <= std::fabs(u));
    REQUIRE(std::fabs(next) <= 1.0 / (2.0 * std::sqrt(h)) * (1 + 1e-15));
    // u - u * (h u^2 / (1 + h u^2)) cancels; the rounding error grows like h u^2 ulp
    const double closed = std::fabs(u) / (1 + h * u * u);
    REQUIRE(std::fabs(std::fabs(next) - closed) <= 4e-16 * (2.0 + h * u * u) * closed);
  }
}

TEST_CASE("naive EM grows when |u0| > sqrt(2/h)") {
  for (double h : {0.1, 0.01, 0.001}) {
    const double u0 = 1.01 * std::sqrt(2.0 / h);
    CHECK(std::fabs(step(SchemeSpec::naive_em(), u0, h, 0.0)) > u0);
  }
}

TEST_CASE("integrate: zero initial condition stays zero") {
  const TimeGrid g(1.0, 6);
  const BrownianPath p = sample_path(1, 0, g);
  for (const auto& s : all_schemes()) {
    const Trajectory t = integrate(s, g, p, 0.0);
    CHECK_FALSE(t.blew_up());
    for (double v : t.values) REQUIRE(v == 0.0);
  }
}

TEST_CASE("weak-tamed equals regularized EM with eps = h bit for bit") {
  for (int level = 0; level < 10; ++level) {
    const TimeGrid g(1.0, level);
    const SchemeSpec reg = SchemeSpec::regularized_em(g.h());
    for (std::uint64_t k = 0; k < 20; ++k) {
      const BrownianPath p = sample_path(11, k, g);
      const double u0 = 0.25 * static_cast<double>(k) - 2.0;
      const Trajectory a = integrate(SchemeSpec::weak_tamed(), g, p, u0);
      const Trajectory b = integrate(reg, g, p, u0);
      REQUIRE(a.values == b.values);
    }
  }
}

TEST_CASE("integrate: naive EM blow-up is detected and saturated") {
  const TimeGrid g = TimeGrid::from_step(1.0, 0.1);
  const Trajectory t = integrate(SchemeSpec::naive_em(), g, zero_path(g), 10.0);
  CHECK(t.values[0] == 10.0);
  CHECK(t.values[1] == doctest::Approx(-90.0));
  CHECK(std::fabs(t.values[3]) > 1e10);
  REQUIRE(t.blew_up());
  CHECK(t.saturated);
  const auto b = static_cast<std::size_t>(*t.blow_up_step);
  CHECK(b == 6);  // u_5 ~ -1.9e118 is still finite, u_6 overflows
  for (std::size_t n = b; n < t.values.size(); ++n) REQUIRE(std::fabs(t.values[n]) == kSaturation);
  for (std::size_t n = 0; n < b; ++n) REQUIRE(std::fabs(t.values[n]) <= kSaturation);
}

TEST_CASE("integrate: grid mismatch") {
  const TimeGrid g(1.0, 3);
  CHECK_THROWS_AS(integrate(SchemeSpec::weak_tamed(), TimeGrid(1.0, 4), sample_path(1, 0, g), 1.0), UsageError);
  CHECK_THROWS_AS(integrate(SchemeSpec::weak_tamed(), g, sample_path(1, 0, g), std::nan("")), DomainError);
}

TEST_CASE("weak-tamed stays finite for h <= 1") {
  for (int level = 0; level <= 8; ++level) {
    const TimeGrid g(1.0, level);
    for (std::uint64_t k = 0; k < 200; ++k) {
      const Trajectory t = integrate(SchemeSpec::weak_tamed(), g, sample_path(5, k, g), 1e6);
      REQUIRE_FALSE(t.blew_up());
    }
  }
}

TEST_CASE("interpolant") {
  const TimeGrid fine(1.0, 6);
  const BrownianPath fp = sample_path(2, 0, fine);
  for (const auto& s : all_schemes()) {
    // same grid: equals the trajectory
    const Trajectory t = integrate(s, fine, fp, 0.8);
    CHECK(interpolant_values(s, t, fp).values == t.values);

    // coarse nodes agree exactly with the coarse trajectory
    const BrownianPath cp = coarsen(fp, 8);
    const Trajectory ct = integrate(s, cp.grid(), cp, 0.8);
    const Trajectory iv = interpolant_values(s, ct, fp);
    REQUIRE(iv.grid == fine);
    for (std::size_t n = 0; n < ct.values.size(); ++n) REQUIRE(iv.values[8 * n] == ct.values[n]);
  }
  // zero noise, one coarse step split in two: linear drift segment
  const TimeGrid f2(1.0, 1);
  const BrownianPath z(f2, {0.0, 0.0}, 0, 0);
  const BrownianPath zc = coarsen(z, 2);
  const SchemeSpec wt = SchemeSpec::weak_tamed();
  const Trajectory c = integrate(wt, zc.grid(), zc, 1.5);
  const Trajectory iv = interpolant_values(wt, c, z);
  CHECK(iv.values[1] == doctest::Approx(1.5 + 0.5 * drift(1.5, 1.0)).epsilon(1e-15));
  CHECK(iv.values[2] == c.values[1]);

  CHECK_THROWS_AS(interpolant_values(wt, integrate(wt, fine, fp, 1.0), coarsen(fp, 2)), UsageError);
}

TEST_CASE("interpolant at fine nodes follows frozen coefficients") {
  const TimeGrid fine(1.0, 4);
  const BrownianPath fp = sample_path(12, 3, fine);
  const BrownianPath cp = coarsen(fp, 4);
  const SchemeSpec wt = SchemeSpec::weak_tamed();
  const Trajectory ct = integrate(wt, cp.grid(), cp, 1.2);
  const Trajectory iv = interpolant_values(wt, ct, fp);
  const double H = cp.grid().h();
  for (std::size_t n = 0; n < 4; ++n) {
    const double v = ct.values[n];
    double w = 0.0;
    for (std::size_t j = 1; j < 4; ++j) {
      w += fp.increments()[4 * n + j - 1];
      const double tau = static_cast<double>(j) * fine.h();
      const double expect = v + tau * drift(v, H) + diffusion(v, H) * w;
      REQUIRE(iv.values[4 * n + j] == doctest::Approx(expect).epsilon(1e-14));
    }
  }
}
