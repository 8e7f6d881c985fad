#pragma once

#include <utility>

namespace tamed::rates {

// Exponent bookkeeping shared by the localization lemmas.
//   p      a-priori sup-moment order         s     pointwise-moment order (s > p)
//   q      target pointwise order            eta   target sup order (eta < p)
//   alpha  pointwise order in the theorem    beta  sup order for the SDE difference
//   gamma  threshold exponent (|v| > h^-gamma stops)
//   delta  localized-error exponent          rho   loss exponent, delta = (1 - rho gamma)/2
//   kappa  slack in the h^{1-} convention, h^{1-} := h^{1 - kappa}
struct RateParams {
  double p = 1.5;
  double s = 3.0;
  double q = 1.0;
  double eta = 0.5;
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 0.05;
  double delta = 0.35;
  double rho = 6.0;
  double kappa = 0.01;

  // Throws DomainError unless 0 < eta < p, 0 < q < s, p < s, gamma, delta, rho > 0, kappa in (0, 1).
  void validate() const;
};

// Exponent (1 - kappa) in h^{1-}.
double one_minus(double kappa);

// (1 - rho gamma) / 2
double localized_delta(double rho, double gamma);

// min(gamma (p - eta) / eta, delta)
double effective_rate_strong(double gamma, double delta, double p, double eta);

// p gamma / (gamma + delta): for eta at or below this value the rate is delta.
double strong_rate_threshold(double gamma, double delta, double p);

// 2^{(p - eta)/p} 2^eta
double localization_constant(double p, double eta);

// (1/2) (p - eta) / (p - eta + eta rho / 2)
double rate_corollary(double p, double eta, double rho);

// eta / (2p + eta (rho - 2)), the gamma balancing both terms above.
double corollary_optimal_gamma(double p, double eta, double rho);

// p (s - q) / (2 p (s - q) + (p + rho) q s)
double rate_lemma_weak(double p, double s, double q, double rho);

// min((delta - gamma p / 2) q, gamma p (s - q) / s) / q for general delta, gamma.
double lemma_weak_rate_general(double delta, double gamma, double p, double s, double q);

// q s / (p (q s + 2 (s - q)) + q rho s)
double lemma_weak_optimal_gamma(double p, double s, double q, double rho);

// Exponents of the main convergence result: first is the pointwise
// (sup_t E|e|^alpha)^{1/alpha} rate (1/2)(3 - alpha)/(3 + 25/3 alpha), second
// the uniform (E sup_t |e|^eta)^{1/eta} rate (1/2)(1 - eta)/(1 + 3 eta).
// Requires 0 < alpha < 2 and 0 < eta < 1.
std::pair<double, double> theorem_exponents(double alpha, double eta);

// Printed rates for u - v: sup (1/2)(3/2 - beta)/(3/2 + 2 beta), beta in (0, 3/2);
// pointwise (1/2)(3 - alpha)/(3 + 13/2 alpha), alpha in (0, 3).
double sde_difference_sup_exponent(double beta);
double sde_difference_pointwise_exponent(double alpha);

// Printed rates for vbar - v: sup (1/2)(1 - eta)/(1 + 3 eta), eta in (0, 1);
// pointwise (1/2)(3 - alpha)/(3 + 25/3 alpha). The pointwise one disagrees
// with rate_lemma_weak(1, 3, alpha, 8) = (3 - alpha)/(6 + 25 alpha); both are
// exposed and neither is preferred.
double discretization_sup_exponent(double eta);
double discretization_pointwise_exponent(double alpha);
double discretization_pointwise_exponent_from_lemma(double alpha);

}  // namespace tamed::rates
