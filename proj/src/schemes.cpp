#include "tamed/schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "tamed/coefficients.hpp"
#include "tamed/errors.hpp"

namespace tamed {

namespace {

// v + tau f(v) + s(v) dw with f = -v s(v), grouped as v + s(v) (tau (-v) + dw).
// The grouping is the gain form of the ensemble update, which keeps the
// two-particle reduction exact.
inline double regularized_partial(double v, double eps, double tau, double dw) {
  const double gain = diffusion_unchecked(v, eps);
  return v + gain * (tau * (-v) + dw);
}

}  // namespace

SchemeSpec SchemeSpec::regularized_em(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("RegularizedEM: epsilon must be positive and finite");
  }
  return SchemeSpec(SchemeKind::kRegularizedEM, epsilon);
}

SchemeSpec SchemeSpec::parse(const std::string& name) {
  if (name == "naive-em") return naive_em();
  if (name == "weak-tamed") return weak_tamed();
  if (name == "drift-tamed") return drift_tamed();
  if (name == "increment-tamed") return increment_tamed();
  const std::string prefix = "regularized-em:";
  if (name.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double eps = 0.0;
    try {
      eps = std::stod(name.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != name.size() - prefix.size()) {
      throw UsageError("scheme: cannot parse epsilon in '" + name + "'");
    }
    return regularized_em(eps);
  }
  throw UsageError("scheme: unknown scheme '" + name + "'");
}

std::string SchemeSpec::name() const {
  switch (kind_) {
    case SchemeKind::kNaiveEM: return "naive-em";
    case SchemeKind::kWeakTamedEnKF: return "weak-tamed";
    case SchemeKind::kDriftTamed: return "drift-tamed";
    case SchemeKind::kIncrementTamed: return "increment-tamed";
    case SchemeKind::kRegularizedEM: {
      std::ostringstream os;
      os.precision(17);
      os << "regularized-em:" << epsilon_;
      return os.str();
    }
  }
  return "unknown";
}

double SchemeSpec::epsilon_for(double h) const noexcept {
  switch (kind_) {
    case SchemeKind::kWeakTamedEnKF: return h;
    case SchemeKind::kRegularizedEM: return epsilon_;
    default: return 0.0;
  }
}

double partial_step(const SchemeSpec& spec, double u, double h, double tau, double dw_partial,
                    double dW_step) {
  switch (spec.kind()) {
    case SchemeKind::kNaiveEM:
    case SchemeKind::kWeakTamedEnKF:
    case SchemeKind::kRegularizedEM:
      return regularized_partial(u, spec.epsilon_for(h), tau, dw_partial);
    case SchemeKind::kDriftTamed: {
      const double f = -(u * u * u);
      return u + tau * f / (1.0 + h * std::fabs(f)) + (u * u) * dw_partial;
    }
    case SchemeKind::kIncrementTamed: {
      const double full = -h * (u * u * u) + (u * u) * dW_step;
      const double part = -tau * (u * u * u) + (u * u) * dw_partial;
      return u + part / std::max(1.0, std::fabs(full));
    }
  }
  return u;
}

double step(const SchemeSpec& spec, double u, double h, double dW) {
  if (!(h > 0.0)) throw DomainError("step: h must be > 0");
  return partial_step(spec, u, h, h, dW, dW);
}

namespace {

inline bool exceeds(double x) { return !std::isfinite(x) || std::fabs(x) > kSaturation; }

}  // namespace

Trajectory integrate(const SchemeSpec& spec, const TimeGrid& grid, const BrownianPath& path, double u0) {
  if (!(path.grid() == grid)) {
    throw UsageError("integrate: path grid does not match integration grid");
  }
  if (!std::isfinite(u0)) throw DomainError("integrate: non-finite initial condition");
  const auto n = static_cast<std::size_t>(grid.steps());
  const double h = grid.h();
  const auto inc = path.increments();

  Trajectory out{grid, std::vector<double>(n + 1), std::nullopt, false};
  out.values[0] = u0;
  double u = u0;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = step(spec, u, h, inc[i]);
    if (exceeds(next)) {
      const bool negative = std::isnan(next) ? std::signbit(u) : std::signbit(next);
      const double pinned = negative ? -kSaturation : kSaturation;
      std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(i + 1), out.values.end(), pinned);
      out.blow_up_step = static_cast<std::int64_t>(i + 1);
      out.saturated = true;
      return out;
    }
    out.values[i + 1] = next;
    u = next;
  }
  return out;
}

Trajectory interpolant_values(const SchemeSpec& spec, const Trajectory& coarse, const BrownianPath& fine_path) {
  const TimeGrid& cg = coarse.grid;
  const TimeGrid& fg = fine_path.grid();
  if (cg.horizon() != fg.horizon() || cg.base() != fg.base() || fg.level() < cg.level()) {
    throw UsageError("interpolant_values: fine grid does not refine the coarse grid");
  }
  const std::int64_t factor = std::int64_t{1} << (fg.level() - cg.level());
  const auto n_coarse = static_cast<std::size_t>(cg.steps());
  const auto inc = fine_path.increments();
  const double h = cg.h();
  const double hf = fg.h();

  Trajectory out{fg, std::vector<double>(static_cast<std::size_t>(fg.steps()) + 1), std::nullopt,
                 coarse.saturated};
  if (coarse.blow_up_step) {
    out.blow_up_step = *coarse.blow_up_step * factor;
  }

  std::vector<double> block(static_cast<std::size_t>(factor));
  for (std::size_t n = 0; n < n_coarse; ++n) {
    const double v = coarse.values[n];
    const std::size_t base = n * static_cast<std::size_t>(factor);
    out.values[base] = v;
    if (std::fabs(v) >= kSaturation) {
      std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(base + 1), factor - 1, v);
      continue;
    }
    double dW_step = 0.0;
    if (spec.kind() == SchemeKind::kIncrementTamed) {
      // Full-step increment with the same pairwise grouping as coarsen().
      std::copy_n(inc.begin() + static_cast<std::ptrdiff_t>(base), factor, block.begin());
      for (std::size_t width = block.size(); width > 1; width /= 2) {
        for (std::size_t j = 0; j < width / 2; ++j) block[j] = block[2 * j] + block[2 * j + 1];
      }
      dW_step = block[0];
    }
    double w = 0.0;
    for (std::int64_t m = 1; m < factor; ++m) {
      w += inc[base + static_cast<std::size_t>(m) - 1];
      const double tau = static_cast<double>(m) * hf;
      double value = partial_step(spec, v, h, tau, w, dW_step);
      if (exceeds(value)) value = std::signbit(value) ? -kSaturation : kSaturation;
      out.values[base + static_cast<std::size_t>(m)] = value;
    }
  }
  out.values.back() = coarse.values.back();
  return out;
}

}  // namespace tamed
