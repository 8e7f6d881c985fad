#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tamed/schemes.hpp"
#include "tamed/statistics.hpp"

namespace tamed {

struct StrongErrorConfig {
  SchemeSpec spec = SchemeSpec::weak_tamed();
  std::vector<int> levels;       // grid levels, h = T 2^-level
  double eta = 0.5;              // order of the sup-in-time functional
  double alpha = 1.0;            // order of the pointwise functional
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double horizon = 1.0;
  double u0 = 1.0;
  int reference_offset = 4;      // reference level = max(levels) + offset
  std::optional<int> reference_level;  // overrides the offset when set
  bool check_reference = true;   // also measure reference vs one level coarser
  int bootstrap_resamples = kBootstrapResamples;
  unsigned workers = 0;          // 0 = hardware concurrency
};

struct ErrorStats {
  int level = 0;
  double h = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double eta_error = 0.0;             // (E max_t |e|^eta)^{1/eta}
  double alpha_error = 0.0;           // (max_t E |e(t)|^alpha)^{1/alpha}
  std::size_t samples = 0;
  double ci_halfwidth = 0.0;          // bootstrap 95% half-width of log2(eta_error)
  double alpha_ci_halfwidth = 0.0;    // same for log2(alpha_error), on snapshot nodes
  std::size_t blowup_count = 0;
};

struct StrongErrorResult {
  std::vector<ErrorStats> stats;      // in the order of config.levels
  int reference_level = 0;
  std::optional<ErrorStats> reference_check;  // reference vs level reference - 1
  double reference_ratio_eta = 0.0;   // check error / smallest measured error
  double reference_ratio_alpha = 0.0;
  bool reference_certified = false;   // both ratios below kReferenceCertifyRatio
  double max_coupling_gap = 0.0;      // max |W(T) coarse - W(T) fine| over samples
};

inline constexpr double kReferenceCertifyRatio = 0.1;

// Coupled-path strong error of `spec` against the weak-tamed scheme at the
// reference level. Each sample draws one path on the reference grid; every
// coarser level runs on its block-summed coarsening, and the interpolant is
// compared node by node on the reference grid.
StrongErrorResult estimate_strong_error(const StrongErrorConfig& config);

enum class ErrorFunctional { kUniform, kPointwise };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double theoretical_exponent = 0.0;
  std::size_t points = 0;
  std::vector<std::string> warnings;
};

// Least squares of log2(error) on log2(h). Zero errors are dropped with a
// warning; fewer than four remaining points throws UsageError.
RateFit fit_rate(const std::vector<ErrorStats>& stats, ErrorFunctional which, double theoretical);

// Least squares on raw (h, error) pairs.
RateFit fit_loglog(const std::vector<double>& h, const std::vector<double>& error, double theoretical);

}  // namespace tamed
