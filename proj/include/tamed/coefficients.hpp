#pragma once

#include <cmath>
#include <concepts>

#include "tamed/errors.hpp"

namespace tamed {

// Coefficients of dv = f(v) dt + sigma(v) dW with
//   f(v) = -v^3 / (1 + eps v^2),   sigma(v) = v^2 / (1 + eps v^2).
// eps = 0 recovers du = -u^3 dt + u^2 dW.
struct Coefficients {
  double epsilon = 0.0;

  explicit Coefficients(double eps = 0.0) : epsilon(eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
      throw DomainError("Coefficients: epsilon must be finite and >= 0");
    }
  }

  double drift(double u) const;
  double diffusion(double u) const;
};

namespace detail {

template <std::floating_point Real>
inline void require_finite(Real u, Real eps, const char* who) {
  if (!std::isfinite(u) || !std::isfinite(eps)) {
    throw DomainError(std::string(who) + ": non-finite input");
  }
  if (eps < Real(0)) {
    throw DomainError(std::string(who) + ": epsilon must be >= 0");
  }
}

}  // namespace detail

// Unchecked kernels; the operation order here is shared by every scheme so
// that regularized EM with eps = h and the weak-tamed map agree bit for bit.
template <std::floating_point Real>
constexpr Real diffusion_unchecked(Real u, Real eps) {
  const Real u2 = u * u;
  return u2 / (Real(1) + eps * u2);
}

template <std::floating_point Real>
constexpr Real drift_unchecked(Real u, Real eps) {
  const Real u2 = u * u;
  return -(u2 * u) / (Real(1) + eps * u2);
}

template <std::floating_point Real>
Real drift(Real u, Real eps) {
  detail::require_finite(u, eps, "drift");
  return drift_unchecked(u, eps);
}

template <std::floating_point Real>
Real diffusion(Real u, Real eps) {
  detail::require_finite(u, eps, "diffusion");
  return diffusion_unchecked(u, eps);
}

// min(1/eps, a^2 + b^2)
double t_tilde(double a, double b, double epsilon);

inline double Coefficients::drift(double u) const { return tamed::drift(u, epsilon); }
inline double Coefficients::diffusion(double u) const { return tamed::diffusion(u, epsilon); }

}  // namespace tamed
