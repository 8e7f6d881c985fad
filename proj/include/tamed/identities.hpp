#pragma once

namespace tamed {

// One-sided Lipschitz identity of the regularized coefficients:
//
//   [f(v) - f(w)](v - w) + 1/2 [s(v) - s(w)]^2
//     = -(v - w)^2 / 2 * N / D,
//   N = v^2 + w^2 + 2 eps v^2 w^2 + (v + w)^2 (1 - 1/D),
//   D = (1 + eps v^2)(1 + eps w^2).
//
// The closed form carries 2 eps v^2 w^2; with a single eps v^2 w^2 the
// identity is false (v = 1, w = -1, eps = 1 gives -2 vs -1.5).
double one_sided_identity_lhs(double v, double w, double epsilon);
double one_sided_identity_rhs(double v, double w, double epsilon);

// Closed form with the coefficient of eps v^2 w^2 equal to one. Kept to
// quantify how far it is from the left side; not an identity.
double one_sided_identity_rhs_single_cross(double v, double w, double epsilon);

// |LHS - RHS| / (1 + |LHS|). Both sides are evaluated in extended precision
// from double inputs, since f(v) - f(w) cancels catastrophically for v ~ w
// at large |v|.
double one_sided_identity_residual(double v, double w, double epsilon);

// Same residual with both sides evaluated in double.
double one_sided_identity_residual_double(double v, double w, double epsilon);

struct LipschitzCheck {
  bool drift_ok = false;
  bool diffusion_ok = false;
  bool operator==(const LipschitzCheck&) const = default;
};

inline constexpr double kDriftLipschitzConstant = 1.5;
inline constexpr double kDiffusionLipschitzConstant = 1.4142135623730951;  // sqrt(2)

// |f(xi) - f(z)| <= 3/2 * T~(xi, z) |xi - z|
// |s(xi) - s(z)| <= sqrt(2) sqrt(z^2 + xi^2) / (1 + eps (z^2 + xi^2)) |xi - z|
//               <= sqrt(2) sqrt(T~(xi, z)) |xi - z|
LipschitzCheck lipschitz_bound_check(double xi, double z, double epsilon);

// Terms of the Ito expansion of (u - v)^2 for u solving the true SDE and v
// the regularized one:
//   T1 = (u^2 + uv + v^2) / (1 + eps v^2),  T2 = (u + v) / (1 + eps v^2).
double ito_t1(double u, double v, double epsilon);
double ito_t2(double u, double v, double epsilon);
// (u^2 + v^2) / (1 + eps v^2)^2
double ito_lower_bound(double u, double v, double epsilon);

struct ItoChainCheck {
  bool plus_chain = false;   // 2 T1 + T2^2 >= bound >= 0
  bool minus_chain = false;  // 2 T1 - T2^2 >= bound >= 0
};
ItoChainCheck ito_chain_check(double u, double v, double epsilon);

}  // namespace tamed
