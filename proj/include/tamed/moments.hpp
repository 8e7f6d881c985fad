#pragma once

#include <cstdint>
#include <vector>

#include "tamed/schemes.hpp"

namespace tamed {

struct MomentReport {
  SchemeSpec spec = SchemeSpec::weak_tamed();
  double h = 0.0;
  double p = 0.0;
  double sup_of_mean = 0.0;     // max_n mean |u_n|^p
  double sup_of_mean_ci = 0.0;  // 1.96 sd / sqrt(M) at the maximizing node
  std::int64_t sup_node = 0;
  double mean_of_sup = 0.0;     // mean of max_n |u_n|^p over non-blown paths
  double integral_term = 0.0;   // mean of h sum_{n<N} |u_n|^{p+2} / (1 + h u_n^2)^2
  double blowup_fraction = 0.0;
  std::size_t samples = 0;
  bool saturated = false;       // some reported moment hit the sentinel
  std::vector<double> node_means;        // mean |u_n|^p, n = 0..N
  std::vector<double> node_ci;           // 1.96 sd / sqrt(M) of each node mean
  std::vector<double> step_change_mean;  // mean (|u_{n+1}|^p - |u_n|^p), n = 0..N-1
  std::vector<double> step_change_ci;    // 1.96 sd / sqrt(M) of the same
};

// max_n (mean_{n+1} - mean_n - ci_{n+1}); positive means the node means rise
// by more than their own confidence half-width somewhere.
double max_rise_beyond_ci(const MomentReport& report);

// Moments over M independent paths (not coupled across grids). Values past a
// blow-up are excluded from the node sums; blown-up paths are excluded from
// mean_of_sup and integral_term and counted in blowup_fraction.
MomentReport estimate_moments(const SchemeSpec& spec, const TimeGrid& grid, double p, std::size_t samples,
                              std::uint64_t seed, double u0, unsigned workers = 0);

// |E[step(u, h, sqrt(h) Z)^2] - u^2/(1 + h u^2)| for the weak-tamed step,
// with the expectation taken by Gauss-Hermite quadrature on `nodes` points.
double second_moment_recursion_check(double h, double u, int nodes = 64);

// Closed form of the conditional second moment: (u^2 + h u^4)/(1 + h u^2)^2.
double second_moment_closed_form(double h, double u);

// Probabilists' Gauss-Hermite rule: sum_i w_i g(x_i) ~ E g(Z), Z ~ N(0, 1).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite(int n);

struct BlowupRow {
  double h = 0.0;
  double median_abs_endpoint = 0.0;  // saturated endpoints count as kSaturation
  double exceed_fraction = 0.0;      // |u_N| > threshold (or blown up)
  double blowup_fraction = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kExceedThreshold = 1e10;

// Naive Euler-Maruyama endpoint statistics per step size on [0, T].
std::vector<BlowupRow> em_blowup_profile(const std::vector<double>& h_list, double u0, std::size_t samples,
                                         std::uint64_t seed, double horizon = 1.0, unsigned workers = 0);

struct DivergenceReport {
  double u0 = 0.0;
  double h = 0.0;
  int step_limit = 0;
  std::size_t samples = 0;
  double em_exceed_within_limit = 0.0;  // fraction with |u_n| > 1e10 for some n <= step_limit
  double em_exceed_by_horizon = 0.0;    // same, any n <= N
  std::size_t tamed_bound_violations = 0;  // paths breaking max|u_n| <= |u0| + 5 max|W_n|
  std::size_t tamed_blowups = 0;
  double tamed_max_ratio = 0.0;         // max over paths of max|u_n| / (|u0| + 5 max|W_n|)
};

// Naive EM and the weak-tamed scheme on the same paths.
DivergenceReport divergence_comparison(double u0, double h, std::size_t samples, std::uint64_t seed,
                                       double horizon = 1.0, int step_limit = 3, unsigned workers = 0);

}  // namespace tamed
