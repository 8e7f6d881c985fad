#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tamed/config.hpp"
#include "tamed/enkf.hpp"
#include "tamed/error_harness.hpp"
#include "tamed/moments.hpp"

namespace tamed {

struct RunResult {
  std::string csv;
  nlohmann::json summary;
  std::vector<std::string> failures;  // failed property checks, empty on success
  std::vector<std::string> notes;     // informational, never affects the exit code
  bool passed() const noexcept { return failures.empty(); }
};

// Runs one validated config. Output depends only on the config, never on
// `workers`.
RunResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

struct IdentitySweep {
  std::size_t samples = 0;
  double max_residual = 0.0;               // extended-precision evaluation
  double max_residual_double = 0.0;        // same identity, double only
  double min_single_cross_residual = 0.0;  // smallest miss of the one-cross variant
  double max_single_cross_residual = 0.0;
  std::size_t drift_failures = 0;
  std::size_t diffusion_failures = 0;
  std::size_t ito_plus_failures = 0;
  std::size_t ito_minus_failures = 0;
};

// v, w uniform on [-1e3, 1e3], eps log-uniform on [1e-6, 1] for the identity;
// log-uniform magnitudes in [1e-3, 1e3] with random signs for the bounds.
IdentitySweep identity_sweep(std::size_t samples, std::uint64_t seed, unsigned workers = 0);
inline constexpr double kIdentityTolerance = 1e-12;

struct RateConsistency {
  double corollary_vs_sde_sup = 0.0;            // max |rate_corollary(3/2, b, 6) - sup exponent|
  double corollary_vs_discretization_sup = 0.0; // max |rate_corollary(1, e, 8) - sup exponent|
  double eta_limit_error = 0.0;                 // max |rate_corollary(p, ~0, rho) - 1/2|
  double q_limit_error = 0.0;                   // max |rate_lemma_weak(p, s, ~0, rho) - 1/2|
  double pointwise_printed_vs_lemma = 0.0;      // max discrepancy over alpha in (0, 2)
};
RateConsistency rate_consistency(int grid_points = 1000);

std::string strong_error_csv(const std::vector<ErrorStats>& stats);
std::string moments_csv(const std::vector<MomentReport>& reports);
std::string blowup_csv(const std::vector<BlowupRow>& rows);

// First step index where the J = 2 ensemble's q differs from the scalar
// weak-tamed step driven by sqrt(h) (zeta_1 - zeta_bar); nullopt if none.
std::optional<int> reduction_mismatch(const std::vector<EnsembleState>& states, const EnsembleProblem& problem,
                                      std::uint64_t seed, std::uint64_t chain);

// Largest distance of any particle of any iterate from the affine span of the
// initial ensemble, relative to 1 + |u - mean_0|.
double subspace_residual(const std::vector<EnsembleState>& states);

}  // namespace tamed
