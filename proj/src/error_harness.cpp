#include "tamed/error_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"

namespace tamed {

namespace {

constexpr std::size_t kSnapshotIntervals = 32;

struct LevelPlan {
  int level;
  std::size_t slot;  // index into per-level accumulators
};

struct Accumulator {
  std::vector<std::vector<double>> node_sums;  // [slot][node] sum of |e|^alpha
  std::vector<std::vector<double>> sup_values; // [slot][sample] max_t |e|^eta
  std::vector<std::vector<double>> snapshots;  // [slot][sample * cols + j]
  std::vector<std::size_t> blowups;
  double coupling_gap = 0.0;
};

void validate(const StrongErrorConfig& c, int ref) {
  if (c.levels.empty()) throw UsageError("strong error: levels must not be empty");
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw UsageError("strong error: eta must lie in (0, 1)");
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) throw UsageError("strong error: alpha must lie in (0, 2)");
  if (c.samples == 0) throw UsageError("strong error: samples must be positive");
  if (!std::isfinite(c.u0)) throw UsageError("strong error: u0 must be finite");
  for (int l : c.levels) {
    if (l < 0 || l > ref) throw UsageError("strong error: levels must lie in [0, reference level]");
  }
  if (ref > 24) throw UsageError("strong error: reference level above 24 is not supported");
}

}  // namespace

StrongErrorResult estimate_strong_error(const StrongErrorConfig& config) {
  const int max_level = *std::max_element(config.levels.begin(), config.levels.end());
  const int ref = config.reference_level.value_or(max_level + config.reference_offset);
  validate(config, ref);

  const TimeGrid fine_grid(config.horizon, ref);
  const auto fine_nodes = static_cast<std::size_t>(fine_grid.steps()) + 1;
  const std::size_t stride = std::max<std::size_t>(1, (fine_nodes - 1) / kSnapshotIntervals);
  const std::size_t cols = (fine_nodes - 1) / stride + 1;

  // Distinct levels, finest first, so coarsening is applied incrementally.
  std::vector<int> distinct = config.levels;
  const bool with_check = config.check_reference && ref >= 1;
  if (with_check) distinct.push_back(ref - 1);
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t slots = distinct.size();
  auto slot_of = [&](int level) {
    return static_cast<std::size_t>(std::find(distinct.begin(), distinct.end(), level) - distinct.begin());
  };

  const SchemeSpec reference_spec = SchemeSpec::weak_tamed();

  auto work = [&](std::size_t begin, std::size_t end) {
    Accumulator acc;
    acc.node_sums.assign(slots, std::vector<double>(fine_nodes, 0.0));
    acc.sup_values.assign(slots, {});
    acc.snapshots.assign(slots, {});
    acc.blowups.assign(slots, 0);
    for (auto& s : acc.snapshots) s.reserve((end - begin) * cols);

    for (std::size_t k = begin; k < end; ++k) {
      const BrownianPath fine = sample_path(config.seed, k, fine_grid);
      const Trajectory reference = integrate(reference_spec, fine_grid, fine, config.u0);
      if (reference.blew_up()) {
        std::ostringstream os;
        os << "strong error: reference trajectory blew up for sample " << k;
        throw std::runtime_error(os.str());
      }
      BrownianPath current = fine;
      for (std::size_t s = 0; s < slots; ++s) {
        const int level = distinct[s];
        if (current.grid().level() != level) {
          current = coarsen(current, std::int64_t{1} << (current.grid().level() - level));
        }
        const Trajectory coarse = integrate(config.spec, current.grid(), current, config.u0);
        if (coarse.blew_up()) ++acc.blowups[s];
        const Trajectory interp = interpolant_values(config.spec, coarse, fine);

        auto& sums = acc.node_sums[s];
        double worst = 0.0;
        for (std::size_t i = 0; i < fine_nodes; ++i) {
          const double e = std::fabs(interp.values[i] - reference.values[i]);
          worst = std::max(worst, e);
          sums[i] += power_abs(e, config.alpha);
        }
        acc.sup_values[s].push_back(power_abs(worst, config.eta));
        for (std::size_t j = 0; j < cols; ++j) {
          const double e = std::fabs(interp.values[j * stride] - reference.values[j * stride]);
          acc.snapshots[s].push_back(power_abs(e, config.alpha));
        }
      }
      const double gap = std::fabs(current.endpoint() - fine.endpoint());
      acc.coupling_gap = std::max(acc.coupling_gap, gap);
    }
    return acc;
  };

  auto merge = [](Accumulator& total, Accumulator&& part) {
    if (total.node_sums.empty()) {
      total = std::move(part);
      return;
    }
    for (std::size_t s = 0; s < total.node_sums.size(); ++s) {
      auto& dst = total.node_sums[s];
      const auto& src = part.node_sums[s];
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      total.sup_values[s].insert(total.sup_values[s].end(), part.sup_values[s].begin(), part.sup_values[s].end());
      total.snapshots[s].insert(total.snapshots[s].end(), part.snapshots[s].begin(), part.snapshots[s].end());
      total.blowups[s] += part.blowups[s];
    }
    total.coupling_gap = std::max(total.coupling_gap, part.coupling_gap);
  };

  Accumulator total = ordered_reduce(config.samples, config.workers, Accumulator{}, work, merge);

  const double m = static_cast<double>(config.samples);
  auto stats_for = [&](int level) {
    const std::size_t s = slot_of(level);
    ErrorStats st;
    st.level = level;
    st.h = TimeGrid(config.horizon, level).h();
    st.eta = config.eta;
    st.alpha = config.alpha;
    st.samples = config.samples;
    st.blowup_count = total.blowups[s];
    const auto& sup = total.sup_values[s];
    const double sup_mean = std::accumulate(sup.begin(), sup.end(), 0.0) / m;
    st.eta_error = std::pow(sup_mean, 1.0 / config.eta);
    const double node_max = *std::max_element(total.node_sums[s].begin(), total.node_sums[s].end()) / m;
    st.alpha_error = std::pow(node_max, 1.0 / config.alpha);
    const std::uint64_t boot_seed = config.seed ^ (static_cast<std::uint64_t>(level) << 48);
    st.ci_halfwidth = bootstrap_log2_halfwidth(sup, 1, config.eta, config.bootstrap_resamples, boot_seed);
    st.alpha_ci_halfwidth = bootstrap_log2_halfwidth(total.snapshots[s], cols, config.alpha,
                                                     config.bootstrap_resamples, boot_seed + 1);
    return st;
  };

  StrongErrorResult result;
  result.reference_level = ref;
  result.max_coupling_gap = total.coupling_gap;
  for (int level : config.levels) result.stats.push_back(stats_for(level));
  if (with_check) {
    result.reference_check = stats_for(ref - 1);
    double min_eta = INFINITY;
    double min_alpha = INFINITY;
    for (const auto& st : result.stats) {
      if (st.level == ref) continue;
      min_eta = std::min(min_eta, st.eta_error);
      min_alpha = std::min(min_alpha, st.alpha_error);
    }
    if (std::isfinite(min_eta) && min_eta > 0.0 && min_alpha > 0.0) {
      result.reference_ratio_eta = result.reference_check->eta_error / min_eta;
      result.reference_ratio_alpha = result.reference_check->alpha_error / min_alpha;
      result.reference_certified = result.reference_ratio_eta < kReferenceCertifyRatio &&
                                   result.reference_ratio_alpha < kReferenceCertifyRatio;
    }
  }
  return result;
}

RateFit fit_loglog(const std::vector<double>& h, const std::vector<double>& error, double theoretical) {
  if (h.size() != error.size()) throw UsageError("fit_rate: size mismatch");
  RateFit fit;
  fit.theoretical_exponent = theoretical;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(error[i] > 0.0) || !std::isfinite(error[i])) {
      std::ostringstream os;
      os.precision(17);
      os << "excluded h=" << h[i] << " with non-positive or non-finite error " << error[i];
      fit.warnings.push_back(os.str());
      continue;
    }
    xs.push_back(std::log2(h[i]));
    ys.push_back(std::log2(error[i]));
  }
  fit.points = xs.size();
  if (xs.size() < 4) throw UsageError("fit_rate: fewer than four usable step sizes");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw UsageError("fit_rate: step sizes must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(const std::vector<ErrorStats>& stats, ErrorFunctional which, double theoretical) {
  std::vector<double> h;
  std::vector<double> err;
  for (const auto& st : stats) {
    h.push_back(st.h);
    err.push_back(which == ErrorFunctional::kUniform ? st.eta_error : st.alpha_error);
  }
  return fit_loglog(h, err, theoretical);
}

}  // namespace tamed
