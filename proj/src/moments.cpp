#include "tamed/moments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"
#include "tamed/statistics.hpp"

namespace tamed {

namespace {

struct MomentAcc {
  std::vector<double> sums;       // sum |u_n|^p over finite values
  std::vector<double> sq_sums;
  std::vector<double> counts;     // finite values per node
  std::vector<double> diff_sum;   // paired step changes
  std::vector<double> diff_sq;
  std::vector<double> diff_count;
  double sup_sum = 0.0;
  double integral_sum = 0.0;
  std::size_t finite_paths = 0;
  std::size_t blowups = 0;
};

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

MomentReport estimate_moments(const SchemeSpec& spec, const TimeGrid& grid, double p, std::size_t samples,
                              std::uint64_t seed, double u0, unsigned workers) {
  if (!(p > 0.0) || !std::isfinite(p)) throw UsageError("moments: p must be positive");
  if (samples == 0) throw UsageError("moments: samples must be positive");
  if (!std::isfinite(u0)) throw UsageError("moments: u0 must be finite");
  const auto n_steps = static_cast<std::size_t>(grid.steps());
  const std::size_t nodes = n_steps + 1;
  const double h = grid.h();

  auto work = [&](std::size_t begin, std::size_t end) {
    MomentAcc acc;
    acc.sums.assign(nodes, 0.0);
    acc.sq_sums.assign(nodes, 0.0);
    acc.counts.assign(nodes, 0.0);
    acc.diff_sum.assign(n_steps, 0.0);
    acc.diff_sq.assign(n_steps, 0.0);
    acc.diff_count.assign(n_steps, 0.0);
    std::vector<double> pw(nodes);
    for (std::size_t k = begin; k < end; ++k) {
      const Trajectory tr = integrate(spec, grid, sample_path(seed, k, grid), u0);
      const std::size_t valid = tr.blew_up() ? static_cast<std::size_t>(*tr.blow_up_step) : nodes;
      double sup = 0.0;
      double integral = 0.0;
      for (std::size_t n = 0; n < valid; ++n) {
        const double u = tr.values[n];
        pw[n] = power_abs(u, p);
        acc.sums[n] += pw[n];
        acc.sq_sums[n] += pw[n] * pw[n];
        acc.counts[n] += 1.0;
        sup = std::max(sup, pw[n]);
        if (n < n_steps) {
          const double denom = 1.0 + h * u * u;
          integral += h * power_abs(u, p + 2.0) / (denom * denom);
        }
        if (n > 0) {
          const double d = pw[n] - pw[n - 1];
          acc.diff_sum[n - 1] += d;
          acc.diff_sq[n - 1] += d * d;
          acc.diff_count[n - 1] += 1.0;
        }
      }
      if (tr.blew_up()) {
        ++acc.blowups;
      } else {
        acc.sup_sum += sup;
        acc.integral_sum += integral;
        ++acc.finite_paths;
      }
    }
    return acc;
  };
  auto merge = [](MomentAcc& total, MomentAcc&& part) {
    if (total.sums.empty()) {
      total = std::move(part);
      return;
    }
    add_into(total.sums, part.sums);
    add_into(total.sq_sums, part.sq_sums);
    add_into(total.counts, part.counts);
    add_into(total.diff_sum, part.diff_sum);
    add_into(total.diff_sq, part.diff_sq);
    add_into(total.diff_count, part.diff_count);
    total.sup_sum += part.sup_sum;
    total.integral_sum += part.integral_sum;
    total.finite_paths += part.finite_paths;
    total.blowups += part.blowups;
  };
  const MomentAcc acc = ordered_reduce(samples, workers, MomentAcc{}, work, merge);

  MomentReport r;
  r.spec = spec;
  r.h = h;
  r.p = p;
  r.samples = samples;
  r.blowup_fraction = static_cast<double>(acc.blowups) / static_cast<double>(samples);

  auto cap = [&r](double x) {
    if (!std::isfinite(x) || x >= kSaturation) {
      r.saturated = true;
      return kSaturation;
    }
    return x;
  };

  r.node_means.resize(nodes);
  r.node_ci.resize(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    if (acc.counts[n] == 0.0) {
      // every path had blown up before this node
      r.node_means[n] = kSaturation;
      r.saturated = true;
    } else {
      r.node_means[n] = cap(acc.sums[n] / acc.counts[n]);
      r.node_ci[n] = normal_halfwidth(acc.sums[n], acc.sq_sums[n], acc.counts[n]);
    }
  }
  r.sup_node = std::max_element(r.node_means.begin(), r.node_means.end()) - r.node_means.begin();
  r.sup_of_mean = r.node_means[static_cast<std::size_t>(r.sup_node)];
  {
    const auto n = static_cast<std::size_t>(r.sup_node);
    r.sup_of_mean_ci = normal_halfwidth(acc.sums[n], acc.sq_sums[n], acc.counts[n]);
  }
  if (acc.finite_paths > 0) {
    r.mean_of_sup = cap(acc.sup_sum / static_cast<double>(acc.finite_paths));
    r.integral_term = cap(acc.integral_sum / static_cast<double>(acc.finite_paths));
  } else {
    r.mean_of_sup = kSaturation;
    r.integral_term = kSaturation;
    r.saturated = true;
  }
  r.step_change_mean.resize(n_steps);
  r.step_change_ci.resize(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double c = acc.diff_count[n];
    r.step_change_mean[n] = c > 0.0 ? acc.diff_sum[n] / c : 0.0;
    r.step_change_ci[n] = normal_halfwidth(acc.diff_sum[n], acc.diff_sq[n], c);
  }
  return r;
}

double max_rise_beyond_ci(const MomentReport& report) {
  double worst = -INFINITY;
  for (std::size_t n = 0; n + 1 < report.node_means.size(); ++n) {
    worst = std::max(worst, report.node_means[n + 1] - report.node_means[n] - report.node_ci[n + 1]);
  }
  return worst;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw UsageError("gauss_hermite: need at least one node");
  // Golub-Welsch on the Jacobi matrix of the monic probabilists' Hermite
  // polynomials: zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) throw std::runtime_error("gauss_hermite: eigensolver failed");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
  }
  // symmetrize: the rule is exact for odd moments only if x_i = -x_{n-1-i}
  for (int i = 0; i < n / 2; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
    const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
    rule.nodes[a] = -x;
    rule.nodes[b] = x;
    rule.weights[a] = w;
    rule.weights[b] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double second_moment_closed_form(double h, double u) {
  if (!(h > 0.0)) throw UsageError("second moment: h must be positive");
  const double u2 = u * u;
  const double denom = 1.0 + h * u2;
  return (u2 + h * u2 * u2) / (denom * denom);
}

double second_moment_recursion_check(double h, double u, int nodes) {
  if (!(h > 0.0)) throw UsageError("second moment: h must be positive");
  if (u == 0.0) return 0.0;
  const QuadratureRule rule = gauss_hermite(nodes);
  const SchemeSpec spec = SchemeSpec::weak_tamed();
  const double sh = std::sqrt(h);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double next = step(spec, u, h, sh * rule.nodes[i]);
    acc += rule.weights[i] * next * next;
  }
  return std::fabs(acc - second_moment_closed_form(h, u));
}

std::vector<BlowupRow> em_blowup_profile(const std::vector<double>& h_list, double u0, std::size_t samples,
                                         std::uint64_t seed, double horizon, unsigned workers) {
  if (!std::isfinite(u0)) throw UsageError("blowup: u0 must be finite");
  if (samples == 0) throw UsageError("blowup: samples must be positive");
  const SchemeSpec em = SchemeSpec::naive_em();
  std::vector<BlowupRow> rows;
  for (double h : h_list) {
    const TimeGrid grid = TimeGrid::from_step(horizon, h);
    struct Acc {
      std::vector<double> endpoints;
      std::size_t exceed = 0;
      std::size_t blowups = 0;
    };
    auto work = [&](std::size_t begin, std::size_t end) {
      Acc a;
      for (std::size_t k = begin; k < end; ++k) {
        const Trajectory tr = integrate(em, grid, sample_path(seed, k, grid), u0);
        const double last = std::fabs(tr.values.back());
        a.endpoints.push_back(last);
        if (tr.blew_up()) ++a.blowups;
        if (tr.blew_up() || last > kExceedThreshold) ++a.exceed;
      }
      return a;
    };
    auto merge = [](Acc& t, Acc&& p) {
      t.endpoints.insert(t.endpoints.end(), p.endpoints.begin(), p.endpoints.end());
      t.exceed += p.exceed;
      t.blowups += p.blowups;
    };
    const Acc a = ordered_reduce(samples, workers, Acc{}, work, merge);
    BlowupRow row;
    row.h = grid.h();
    row.samples = samples;
    row.median_abs_endpoint = median(a.endpoints);
    row.exceed_fraction = static_cast<double>(a.exceed) / static_cast<double>(samples);
    row.blowup_fraction = static_cast<double>(a.blowups) / static_cast<double>(samples);
    rows.push_back(row);
  }
  return rows;
}

DivergenceReport divergence_comparison(double u0, double h, std::size_t samples, std::uint64_t seed,
                                       double horizon, int step_limit, unsigned workers) {
  if (!std::isfinite(u0)) throw UsageError("divergence: u0 must be finite");
  if (samples == 0) throw UsageError("divergence: samples must be positive");
  if (step_limit < 1) throw UsageError("divergence: step_limit must be at least 1");
  const TimeGrid grid = TimeGrid::from_step(horizon, h);
  const SchemeSpec em = SchemeSpec::naive_em();
  const SchemeSpec tamed = SchemeSpec::weak_tamed();
  struct Acc {
    std::size_t within = 0;
    std::size_t by_horizon = 0;
    std::size_t violations = 0;
    std::size_t blowups = 0;
    double max_ratio = 0.0;
  };
  auto work = [&](std::size_t begin, std::size_t end) {
    Acc a;
    for (std::size_t k = begin; k < end; ++k) {
      const BrownianPath path = sample_path(seed, k, grid);
      const Trajectory naive = integrate(em, grid, path, u0);
      bool within = false;
      bool any = false;
      for (std::size_t n = 0; n < naive.values.size(); ++n) {
        const bool big = std::fabs(naive.values[n]) > kExceedThreshold;
        any = any || big;
        if (n <= static_cast<std::size_t>(step_limit)) within = within || big;
      }
      a.within += within;
      a.by_horizon += any;

      const Trajectory tr = integrate(tamed, grid, path, u0);
      if (tr.blew_up()) ++a.blowups;
      double w = 0.0;
      double max_w = 0.0;
      double max_u = std::fabs(tr.values[0]);
      const auto incs = path.increments();
      for (std::size_t n = 0; n < incs.size(); ++n) {
        w += incs[n];
        max_w = std::max(max_w, std::fabs(w));
        max_u = std::max(max_u, std::fabs(tr.values[n + 1]));
      }
      const double bound = std::fabs(u0) + 5.0 * max_w;
      if (max_u > bound) ++a.violations;
      if (bound > 0.0) a.max_ratio = std::max(a.max_ratio, max_u / bound);
    }
    return a;
  };
  auto merge = [](Acc& t, Acc&& p) {
    t.within += p.within;
    t.by_horizon += p.by_horizon;
    t.violations += p.violations;
    t.blowups += p.blowups;
    t.max_ratio = std::max(t.max_ratio, p.max_ratio);
  };
  const Acc a = ordered_reduce(samples, workers, Acc{}, work, merge);
  DivergenceReport r;
  r.u0 = u0;
  r.h = grid.h();
  r.step_limit = step_limit;
  r.samples = samples;
  r.em_exceed_within_limit = static_cast<double>(a.within) / static_cast<double>(samples);
  r.em_exceed_by_horizon = static_cast<double>(a.by_horizon) / static_cast<double>(samples);
  r.tamed_bound_violations = a.violations;
  r.tamed_blowups = a.blowups;
  r.tamed_max_ratio = a.max_ratio;
  return r;
}

}  // namespace tamed
