#include "tamed/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tamed/errors.hpp"

namespace tamed::rates {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void RateParams::validate() const {
  require(finite_all({p, s, q, eta, alpha, beta, gamma, delta, rho, kappa}), "RateParams: non-finite value");
  require(eta > 0.0 && eta < p, "RateParams: need 0 < eta < p");
  require(q > 0.0 && q < s, "RateParams: need 0 < q < s");
  require(p > 0.0 && p < s, "RateParams: need 0 < p < s");
  require(alpha > 0.0 && beta > 0.0, "RateParams: alpha and beta must be positive");
  require(gamma > 0.0 && delta > 0.0 && rho > 0.0, "RateParams: gamma, delta, rho must be positive");
  require(kappa > 0.0 && kappa < 1.0, "RateParams: kappa must lie in (0, 1)");
}

double one_minus(double kappa) {
  require(kappa > 0.0 && kappa < 1.0, "one_minus: kappa must lie in (0, 1)");
  return 1.0 - kappa;
}

double localized_delta(double rho, double gamma) {
  require(rho > 0.0 && gamma > 0.0, "localized_delta: rho and gamma must be positive");
  return 0.5 * (1.0 - rho * gamma);
}

double effective_rate_strong(double gamma, double delta, double p, double eta) {
  require(finite_all({gamma, delta, p, eta}), "effective_rate_strong: non-finite input");
  require(eta > 0.0 && eta < p, "effective_rate_strong: need 0 < eta < p");
  require(gamma > 0.0 && delta > 0.0, "effective_rate_strong: gamma and delta must be positive");
  return std::min(gamma * (p - eta) / eta, delta);
}

double strong_rate_threshold(double gamma, double delta, double p) {
  require(gamma > 0.0 && delta > 0.0 && p > 0.0, "strong_rate_threshold: positive inputs required");
  return p * gamma / (gamma + delta);
}

double localization_constant(double p, double eta) {
  require(eta > 0.0 && eta < p, "localization_constant: need 0 < eta < p");
  return std::pow(2.0, (p - eta) / p) * std::pow(2.0, eta);
}

double rate_corollary(double p, double eta, double rho) {
  require(finite_all({p, eta, rho}), "rate_corollary: non-finite input");
  require(eta > 0.0 && eta < p, "rate_corollary: need 0 < eta < p");
  require(rho > 0.0, "rate_corollary: rho must be positive");
  return 0.5 * (p - eta) / (p - eta + eta * rho / 2.0);
}

double corollary_optimal_gamma(double p, double eta, double rho) {
  require(eta > 0.0 && eta < p && rho > 0.0, "corollary_optimal_gamma: domain violation");
  return eta / (2.0 * p + eta * (rho - 2.0));
}

double rate_lemma_weak(double p, double s, double q, double rho) {
  require(finite_all({p, s, q, rho}), "rate_lemma_weak: non-finite input");
  require(q > 0.0 && q < s, "rate_lemma_weak: need 0 < q < s");
  require(p > 0.0 && p < s, "rate_lemma_weak: need 0 < p < s");
  require(rho > 0.0, "rate_lemma_weak: rho must be positive");
  return p * (s - q) / (2.0 * p * (s - q) + (p + rho) * q * s);
}

double lemma_weak_rate_general(double delta, double gamma, double p, double s, double q) {
  require(q > 0.0 && q < s && p > 0.0 && p < s, "lemma_weak_rate_general: domain violation");
  require(gamma > 0.0 && delta > 0.0, "lemma_weak_rate_general: gamma and delta must be positive");
  return std::min((delta - gamma * p / 2.0) * q, gamma * p * (s - q) / s) / q;
}

double lemma_weak_optimal_gamma(double p, double s, double q, double rho) {
  require(q > 0.0 && q < s && p > 0.0 && p < s && rho > 0.0, "lemma_weak_optimal_gamma: domain violation");
  return q * s / (p * (q * s + 2.0 * (s - q)) + q * rho * s);
}

std::pair<double, double> theorem_exponents(double alpha, double eta) {
  require(std::isfinite(alpha) && std::isfinite(eta), "theorem_exponents: non-finite input");
  require(alpha > 0.0 && alpha < 2.0, "theorem_exponents: need 0 < alpha < 2");
  require(eta > 0.0 && eta < 1.0, "theorem_exponents: need 0 < eta < 1");
  return {0.5 * (3.0 - alpha) / (3.0 + 25.0 / 3.0 * alpha), 0.5 * (1.0 - eta) / (1.0 + 3.0 * eta)};
}

double sde_difference_sup_exponent(double beta) {
  require(beta > 0.0 && beta < 1.5, "sde_difference_sup_exponent: need 0 < beta < 3/2");
  return 0.5 * (1.5 - beta) / (1.5 + 2.0 * beta);
}

double sde_difference_pointwise_exponent(double alpha) {
  require(alpha > 0.0 && alpha < 3.0, "sde_difference_pointwise_exponent: need 0 < alpha < 3");
  return 0.5 * (3.0 - alpha) / (3.0 + 13.0 / 2.0 * alpha);
}

double discretization_sup_exponent(double eta) {
  require(eta > 0.0 && eta < 1.0, "discretization_sup_exponent: need 0 < eta < 1");
  return 0.5 * (1.0 - eta) / (1.0 + 3.0 * eta);
}

double discretization_pointwise_exponent(double alpha) {
  require(alpha > 0.0 && alpha < 3.0, "discretization_pointwise_exponent: need 0 < alpha < 3");
  return 0.5 * (3.0 - alpha) / (3.0 + 25.0 / 3.0 * alpha);
}

double discretization_pointwise_exponent_from_lemma(double alpha) {
  return rate_lemma_weak(1.0, 3.0, alpha, 8.0);
}

}  // namespace tamed::rates
