// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "tamed/config.hpp"
#include "tamed/enkf.hpp"
#include "tamed/experiments.hpp"
#include "tamed/moments.hpp"
#include "tamed/random.hpp"
#include "tamed/rates.hpp"
#include "tamed/schemes.hpp"

using namespace tamed;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// 1. weak-tamed vs regularized EM(eps = h), 1e3 random cases
Outcome scheme_identity() {
  const CounterStream s(domain_seed(kSeed, StreamDomain::kSweep), 1);
  std::size_t mismatches = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const int level = static_cast<int>(s.bits(4 * k) % 11);
    const auto base = static_cast<std::int64_t>(1 + s.bits(4 * k + 1) % 7);
    const double u0 = 20.0 * s.uniform(4 * k + 2) - 10.0;
    const TimeGrid g(1.0, level, base);
    const BrownianPath p = sample_path(kSeed, k, g);
    const Trajectory a = integrate(SchemeSpec::weak_tamed(), g, p, u0);
    const Trajectory b = integrate(SchemeSpec::regularized_em(g.h()), g, p, u0);
    mismatches += a.values != b.values;
  }
  return {mismatches == 0, "1000 cases, " + std::to_string(mismatches) + " mismatching trajectories"};
}

// 2. two-particle EnKF reduction, 1e3 runs of 1e3 steps
Outcome enkf_reduction() {
  const CounterStream s(domain_seed(kSeed, StreamDomain::kSweep), 2);
  const EnsembleProblem p(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  std::size_t mismatches = 0;
  for (std::uint64_t chain = 0; chain < 1000; ++chain) {
    const double h = 1e-3 * std::pow(500.0, s.uniform(2 * chain));
    const double scale = 0.1 * std::pow(100.0, s.uniform(2 * chain + 1));
    const auto init = EnsembleState::from_particles(scale * initial_particles(kSeed, chain, 1, 2), h);
    const auto states = run_enkf(init, p, 1000, kSeed, chain);
    mismatches += reduction_mismatch(states, p, kSeed, chain).has_value();
  }
  return {mismatches == 0, "1000 runs x 1000 steps, " + std::to_string(mismatches) + " runs with a differing q"};
}

// 3. one-sided identity on 1e6 samples
Outcome one_sided_identity() {
  const IdentitySweep sw = identity_sweep(1000000, kSeed);
  return {sw.samples == 1000000 && sw.max_residual < 1e-12,
          "max relative residual " + num(sw.max_residual) + " over " + std::to_string(sw.samples) +
              " samples (double-only evaluation: " + num(sw.max_residual_double) + ")"};
}

// 4. quadrature recursion on a 20 x 20 grid, then monotone second moment
Outcome second_moment() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double u = std::pow(10.0, -3.0 + 6.0 * i / 19.0);
      const double h = std::pow(10.0, -4.0 + 4.0 * j / 19.0);
      worst = std::max(worst, second_moment_recursion_check(h, u));
    }
  }
  const MomentReport r = estimate_moments(SchemeSpec::weak_tamed(), TimeGrid(1.0, 8), 2.0, 100000, kSeed, 1.0, 0);
  const double rise = max_rise_beyond_ci(r);
  return {worst < 1e-10 && rise <= 0.0,
          "max quadrature residual " + num(worst) + "; M=1e5, h=2^-8: max rise of E u_n^2 beyond CI " + num(rise) +
              " (E u_N^2 = " + num(r.node_means.back()) + ")"};
}

// 5. rate formula cross-consistency
Outcome rate_formulas() {
  const RateConsistency rc = rate_consistency(10000);
  const bool ok = rc.corollary_vs_sde_sup < 1e-12 && rc.corollary_vs_discretization_sup < 1e-12 &&
                  rc.eta_limit_error < 1e-6 && rc.q_limit_error < 1e-6;
  return {ok, "sup-exponent gaps " + num(rc.corollary_vs_sde_sup) + ", " +
                  num(rc.corollary_vs_discretization_sup) + "; limit errors " + num(rc.eta_limit_error) + ", " +
                  num(rc.q_limit_error)};
}

ExperimentConfig strong_config() {
  ExperimentConfig c = defaults_for("strong-error");
  c.levels = {4, 5, 6, 7, 8, 9, 10};
  c.M = 10000;
  c.seed = kSeed;
  c.u0 = 1.0;
  c.T = 1.0;
  c.eta = 0.5;
  c.alpha = 1.0;
  return c;
}

ExperimentConfig blowup_config() {
  ExperimentConfig c = defaults_for("blowup");
  c.u0 = 10.0;
  c.h = 0.1;
  c.h_list = {0.1};
  c.step_limit = 3;
  c.M = 10000;
  c.seed = kSeed;
  return c;
}

ExperimentConfig moments_config() {
  ExperimentConfig c = defaults_for("moments");
  c.levels = {4, 5, 6, 7, 8, 9, 10};
  c.p = {1.0, 2.0, 2.5};
  c.M = 10000;
  c.seed = kSeed;
  c.u0 = 1.0;
  return c;
}

std::vector<RunResult> first_runs;

// 6. empirical strong rates
Outcome strong_rate() {
  const RunResult r = run_experiment(strong_config(), 1);
  first_runs.push_back(r);
  const auto [theory_alpha, theory_eta] = rates::theorem_exponents(1.0, 0.5);
  const double su = r.summary["fits"]["uniform"]["slope"].get<double>();
  const double sp = r.summary["fits"]["pointwise"]["slope"].get<double>();
  const bool ok = su >= theory_eta - 0.05 && su >= 0.40 && sp >= theory_alpha - 0.05 && sp >= 0.40;
  return {ok, "uniform slope " + num(su) + " (theorem " + num(theory_eta) + "), pointwise slope " + num(sp) +
                  " (theorem " + num(theory_alpha) + "), reference ratio " +
                  num(r.summary["reference_ratio_eta"].get<double>())};
}

// 7. EM divergence vs weak-tamed on identical paths
Outcome em_divergence() {
  const RunResult r = run_experiment(blowup_config(), 1);
  first_runs.push_back(r);
  const auto& s = r.summary;
  const double within = s["em_exceed_within_limit"].get<double>();
  const auto viol = s["tamed_bound_violations"].get<std::size_t>();
  const auto blow = s["tamed_blowups"].get<std::size_t>();
  return {within == 1.0 && viol == 0 && blow == 0,
          "EM above 1e10 within 3 steps on " + num(100.0 * within) + "% of paths (by T=1: " +
              num(100.0 * s["em_exceed_by_horizon"].get<double>()) + "%); weak-tamed bound violations " +
              std::to_string(viol) + ", blow-ups " + std::to_string(blow)};
}

// 8. sup-of-mean bounded uniformly in h
Outcome moment_uniformity() {
  const RunResult r = run_experiment(moments_config(), 1);
  first_runs.push_back(r);
  bool ok = r.summary["per_p"].size() == 3;
  std::string detail;
  for (const auto& row : r.summary["per_p"]) {
    const double hi = row["max_sup_of_mean"].get<double>();
    const double lo = row["min_sup_of_mean"].get<double>();
    const double ci = row["max_ci"].get<double>();
    ok = ok && hi <= lo + 3.0 * ci + 0.05;
    detail += "p=" + num(row["p"].get<double>()) + ": [" + num(lo) + ", " + num(hi) + "] ci " + num(ci) + "; ";
  }
  return {ok, detail};
}

// 9. reruns of 6-8 with 4 workers are byte-identical
Outcome determinism() {
  const std::vector<ExperimentConfig> cfgs{strong_config(), blowup_config(), moments_config()};
  bool ok = first_runs.size() == 3;
  std::string detail;
  for (std::size_t i = 0; i < cfgs.size() && i < first_runs.size(); ++i) {
    const RunResult again = run_experiment(cfgs[i], 4);
    const bool same = again.csv == first_runs[i].csv && again.summary.dump() == first_runs[i].summary.dump();
    ok = ok && same;
    detail += cfgs[i].subcommand + (same ? " identical; " : " DIFFERS; ");
  }
  return {ok, detail + "workers {1, 4}"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 scheme identity: weak-tamed == regularized EM(eps=h), bit-exact", scheme_identity},
      {"2 EnKF reduction: J=2 q-sequence == scalar weak-tamed, bit-exact", enkf_reduction},
      {"3 one-sided Lipschitz identity: residual < 1e-12", one_sided_identity},
      {"4 second-moment recursion and monotone E u_n^2", second_moment},
      {"5 rate formula cross-consistency", rate_formulas},
      {"6 empirical strong rate >= theorem - 0.05 and >= 0.40", strong_rate},
      {"7 EM divergence vs weak-tamed boundedness", em_divergence},
      {"8 moment uniformity in h", moment_uniformity},
      {"9 determinism across worker counts", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %s | %s | %.1fs\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
