#include "tamed/identities.hpp"

#include <algorithm>
#include <cmath>

#include "tamed/coefficients.hpp"
#include "tamed/errors.hpp"

namespace tamed {

namespace {

using Ext = long double;

void require(double v, double w, double epsilon, const char* who) {
  if (!std::isfinite(v) || !std::isfinite(w) || !std::isfinite(epsilon)) {
    throw DomainError(std::string(who) + ": non-finite input");
  }
  if (!(epsilon > 0.0)) {
    throw DomainError(std::string(who) + ": epsilon must be > 0");
  }
}

template <class Real>
Real lhs(Real v, Real w, Real eps) {
  const Real df = drift(v, eps) - drift(w, eps);
  const Real ds = diffusion(v, eps) - diffusion(w, eps);
  return df * (v - w) + Real(0.5) * ds * ds;
}

template <class Real>
Real rhs(Real v, Real w, Real eps, Real cross) {
  const Real v2 = v * v;
  const Real w2 = w * w;
  const Real d = (Real(1) + eps * v2) * (Real(1) + eps * w2);
  const Real s = v + w;
  // 1 - 1/D written as (D - 1)/D = eps (v^2 + w^2 + eps v^2 w^2) / D
  const Real one_minus_inv = eps * (v2 + w2 + eps * v2 * w2) / d;
  const Real num = v2 + w2 + cross * eps * v2 * w2 + s * s * one_minus_inv;
  const Real den = Real(1) + eps * v2 + eps * w2 + eps * eps * v2 * w2;
  const Real diff = v - w;
  return -(diff * diff) / Real(2) * num / den;
}

}  // namespace

double one_sided_identity_lhs(double v, double w, double epsilon) {
  require(v, w, epsilon, "one_sided_identity_lhs");
  return lhs(v, w, epsilon);
}

double one_sided_identity_rhs(double v, double w, double epsilon) {
  require(v, w, epsilon, "one_sided_identity_rhs");
  return rhs(v, w, epsilon, 2.0);
}

double one_sided_identity_rhs_single_cross(double v, double w, double epsilon) {
  require(v, w, epsilon, "one_sided_identity_rhs_single_cross");
  return rhs(v, w, epsilon, 1.0);
}

double one_sided_identity_residual(double v, double w, double epsilon) {
  require(v, w, epsilon, "one_sided_identity_residual");
  const Ext l = lhs<Ext>(v, w, epsilon);
  const Ext r = rhs<Ext>(v, w, epsilon, 2.0L);
  return static_cast<double>(std::fabs(l - r) / (1.0L + std::fabs(l)));
}

double one_sided_identity_residual_double(double v, double w, double epsilon) {
  require(v, w, epsilon, "one_sided_identity_residual_double");
  const double l = lhs(v, w, epsilon);
  const double r = rhs(v, w, epsilon, 2.0);
  return std::fabs(l - r) / (1.0 + std::fabs(l));
}

LipschitzCheck lipschitz_bound_check(double xi, double z, double epsilon) {
  require(xi, z, epsilon, "lipschitz_bound_check");
  // Rounding slack for the near-equality cases (xi ~ z, eps (xi^2 + z^2) ~ 0).
  constexpr Ext kSlack = 1e-15L;
  const Ext x = xi;
  const Ext y = z;
  const Ext eps = epsilon;
  const Ext gap = std::fabs(x - y);
  const Ext sq = x * x + y * y;
  const Ext ttilde = std::min(1.0L / eps, sq);

  const Ext df = std::fabs(drift(x, eps) - drift(y, eps));
  const Ext ds = std::fabs(diffusion(x, eps) - diffusion(y, eps));

  const Ext f_bound = Ext(kDriftLipschitzConstant) * ttilde * gap;
  const Ext s_chain = Ext(kDiffusionLipschitzConstant) * std::sqrt(sq) / (1.0L + eps * sq) * gap;
  const Ext s_bound = Ext(kDiffusionLipschitzConstant) * std::sqrt(ttilde) * gap;

  LipschitzCheck out;
  out.drift_ok = df <= f_bound * (1.0L + kSlack);
  out.diffusion_ok = ds <= s_chain * (1.0L + kSlack) && s_chain <= s_bound * (1.0L + kSlack);
  return out;
}

double ito_t1(double u, double v, double epsilon) {
  return (u * u + u * v + v * v) / (1.0 + epsilon * v * v);
}

double ito_t2(double u, double v, double epsilon) {
  return (u + v) / (1.0 + epsilon * v * v);
}

double ito_lower_bound(double u, double v, double epsilon) {
  const double d = 1.0 + epsilon * v * v;
  return (u * u + v * v) / (d * d);
}

ItoChainCheck ito_chain_check(double u, double v, double epsilon) {
  require(u, v, epsilon, "ito_chain_check");
  const Ext uu = u;
  const Ext vv = v;
  const Ext d = 1.0L + Ext(epsilon) * vv * vv;
  const Ext t1 = (uu * uu + uu * vv + vv * vv) / d;
  const Ext t2 = (uu + vv) / d;
  const Ext bound = (uu * uu + vv * vv) / (d * d);
  constexpr Ext kSlack = 1e-15L;
  ItoChainCheck out;
  out.plus_chain = 2.0L * t1 + t2 * t2 >= bound * (1.0L - kSlack) && bound >= 0.0L;
  out.minus_chain = 2.0L * t1 - t2 * t2 >= bound * (1.0L - kSlack) && bound >= 0.0L;
  return out;
}

}  // namespace tamed
