#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tamed/coefficients.hpp"
#include "tamed/identities.hpp"

using namespace tamed;

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("drift and diffusion closed forms") {
  CHECK(drift(0.0, 0.1) == 0.0);
  CHECK(drift(1.0, 1.0) == -0.5);
  CHECK(drift(2.0, 0.0) == -8.0);
  CHECK(diffusion(0.0, 0.5) == 0.0);
  CHECK(diffusion(1.0, 1.0) == 0.5);
  CHECK(diffusion(-3.0, 0.0) == 9.0);
  Coefficients c(0.25);
  CHECK(c.drift(2.0) == -4.0);
  CHECK(c.diffusion(2.0) == 2.0);
}

TEST_CASE("coefficients reject bad input") {
  CHECK_THROWS_AS(drift(kNan, 0.1), DomainError);
  CHECK_THROWS_AS(diffusion(1.0, -0.1), DomainError);
  CHECK_THROWS_AS(Coefficients(-1.0), DomainError);
  CHECK_THROWS_AS(Coefficients{kInf}, DomainError);
  CHECK_THROWS_AS(drift(kInf, 0.0), DomainError);
}

TEST_CASE("odd/even symmetry is exact") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen);
    const double eps = std::ldexp(1.0, -(i % 20));
    REQUIRE(drift(-x, eps) == -drift(x, eps));
    REQUIRE(diffusion(-x, eps) == diffusion(x, eps));
  }
}

TEST_CASE("global bounds of the regularized coefficients") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> e(-6.0, 0.0);
  std::uniform_real_distribution<double> m(-3.0, 6.0);
  for (int i = 0; i < 10000; ++i) {
    const double eps = std::pow(10.0, e(gen));
    const double x = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, m(gen));
    REQUIRE(std::fabs(drift(x, eps)) <= std::fabs(x) / eps * (1 + 1e-15));
    REQUIRE(diffusion(x, eps) <= 1.0 / eps * (1 + 1e-15));
  }
}

TEST_CASE("regularization converges monotonically as eps decreases") {
  for (double x : {0.3, 1.0, -2.5, 17.0}) {
    double prev_f = 0.0;
    double prev_s = 0.0;
    for (int k = 0; k <= 30; ++k) {
      const double eps = std::ldexp(1.0, -k);
      const double f = std::fabs(drift(x, eps));
      const double s = diffusion(x, eps);
      CHECK(f >= prev_f);
      CHECK(s >= prev_s);
      prev_f = f;
      prev_s = s;
    }
    CHECK(drift(x, 1e-300) == doctest::Approx(-x * x * x).epsilon(1e-14));
    CHECK(diffusion(x, 1e-300) == doctest::Approx(x * x).epsilon(1e-14));
  }
}

TEST_CASE("t_tilde") {
  CHECK(t_tilde(3.0, 4.0, 1.0) == 1.0);
  CHECK(t_tilde(3.0, 4.0, 0.01) == 25.0);
  CHECK(t_tilde(0.0, 0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(t_tilde(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("one-sided identity: fixed points") {
  CHECK(one_sided_identity_residual(1.7, 1.7, 0.2) == 0.0);
  CHECK(one_sided_identity_residual(1.7, 1.7, 1e-5) == 0.0);
  CHECK(one_sided_identity_residual(0.0, 0.0, 0.3) == 0.0);
  CHECK(one_sided_identity_residual(1.0, -1.0, 1.0) < 1e-12);
  // both sides equal -2 at (1, -1, 1); the one-cross variant gives -1.5
  CHECK(one_sided_identity_lhs(1.0, -1.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(one_sided_identity_rhs(1.0, -1.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(one_sided_identity_rhs_single_cross(1.0, -1.0, 1.0) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("one-sided identity: left side is never positive") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_real_distribution<double> e(-6.0, 0.0);
  for (int i = 0; i < 20000; ++i) {
    const double v = u(gen);
    const double w = u(gen);
    const double eps = std::pow(10.0, e(gen));
    REQUIRE(one_sided_identity_rhs(v, w, eps) <= 0.0);
    REQUIRE(one_sided_identity_residual(v, w, eps) < 1e-12);
  }
}

TEST_CASE("Lipschitz-type bounds") {
  CHECK(lipschitz_bound_check(0.7, 0.7, 0.3) == LipschitzCheck{true, true});
  CHECK(lipschitz_bound_check(2.0, -2.0, 0.1) == LipschitzCheck{true, true});
  CHECK(lipschitz_bound_check(0.1, 0.1000001, 1.0) == LipschitzCheck{true, true});
  // the point that breaks the constant-one form of the drift bound
  CHECK(lipschitz_bound_check(0.1, 0.1 + 1e-9, 1.0) == LipschitzCheck{true, true});
  CHECK_THROWS_AS(lipschitz_bound_check(1.0, 2.0, 0.0), DomainError);
}

TEST_CASE("Ito chains hold with both signs") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> m(-3.0, 3.0);
  std::uniform_real_distribution<double> e(-6.0, 0.0);
  for (int i = 0; i < 20000; ++i) {
    const double u = (i % 2 ? -1 : 1) * std::pow(10.0, m(gen));
    const double v = (i % 3 ? -1 : 1) * std::pow(10.0, m(gen));
    const double eps = std::pow(10.0, e(gen));
    const ItoChainCheck c = ito_chain_check(u, v, eps);
    REQUIRE(c.plus_chain);
    REQUIRE(c.minus_chain);
  }
  CHECK(ito_t1(1.0, 1.0, 1.0) == 1.5);
  CHECK(ito_t2(1.0, 1.0, 1.0) == 1.0);
  CHECK(ito_lower_bound(1.0, 1.0, 1.0) == 0.5);
}
