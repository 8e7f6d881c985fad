#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tamed/brownian.hpp"

namespace tamed {

enum class SchemeKind {
  kNaiveEM,
  kWeakTamedEnKF,
  kRegularizedEM,
  kDriftTamed,
  kIncrementTamed,
};

// Discretization of du = -u^3 dt + u^2 dW.
//  NaiveEM         u + h(-u^3) + u^2 dW
//  WeakTamedEnKF   u - h u^3/(1 + h u^2) + u^2/(1 + h u^2) dW  (eps = h of the grid)
//  RegularizedEM   Euler step of the eps-regularized SDE, eps fixed
//  DriftTamed      u + h f / (1 + h |f|) + u^2 dW,  f = -u^3
//  IncrementTamed  u + D / max(1, |D|),  D = -h u^3 + u^2 dW
class SchemeSpec {
 public:
  static SchemeSpec naive_em() { return SchemeSpec(SchemeKind::kNaiveEM, 0.0); }
  static SchemeSpec weak_tamed() { return SchemeSpec(SchemeKind::kWeakTamedEnKF, 0.0); }
  static SchemeSpec regularized_em(double epsilon);
  static SchemeSpec drift_tamed() { return SchemeSpec(SchemeKind::kDriftTamed, 0.0); }
  static SchemeSpec increment_tamed() { return SchemeSpec(SchemeKind::kIncrementTamed, 0.0); }

  // "naive-em", "weak-tamed", "regularized-em:<eps>", "drift-tamed", "increment-tamed"
  static SchemeSpec parse(const std::string& name);
  std::string name() const;

  SchemeKind kind() const noexcept { return kind_; }
  // Regularization in effect on a grid with step h (NaiveEM: 0).
  double epsilon_for(double h) const noexcept;

  bool operator==(const SchemeSpec&) const = default;

 private:
  SchemeSpec(SchemeKind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {}
  SchemeKind kind_;
  double epsilon_;
};

// Values with magnitude above this (or non-finite) mark a blow-up; the rest of
// the trajectory is pinned to +-kSaturation.
inline constexpr double kSaturation = 1e150;

// One step of size h driven by dW. Overflow is returned as-is (non-finite);
// integrate() turns it into a blow-up record.
double step(const SchemeSpec& spec, double u, double h, double dW);

// Partial step over [t_n, t_n + tau] with Brownian increment dw_partial,
// where (h, dW_step) describe the full step. partial_step(spec, u, h, h, dW, dW)
// is step(spec, u, h, dW) bit for bit.
double partial_step(const SchemeSpec& spec, double u, double h, double tau, double dw_partial,
                    double dW_step);

struct Trajectory {
  TimeGrid grid;
  std::vector<double> values;  // N + 1 entries
  std::optional<std::int64_t> blow_up_step;
  bool saturated = false;

  bool blew_up() const noexcept { return blow_up_step.has_value(); }
};

Trajectory integrate(const SchemeSpec& spec, const TimeGrid& grid, const BrownianPath& path, double u0);

// Continuous extension of a coarse trajectory evaluated on the nodes of
// fine_path's grid: inside [t_n, t_{n+1}) the value is the partial step from
// v_n with the fine partial Brownian sums; at coarse nodes it is v_n.
Trajectory interpolant_values(const SchemeSpec& spec, const Trajectory& coarse,
                              const BrownianPath& fine_path);

}  // namespace tamed
