#include "tamed/enkf.hpp"

#include <cmath>
#include <stdexcept>

#include "tamed/errors.hpp"
#include "tamed/parallel.hpp"
#include "tamed/random.hpp"

namespace tamed {

namespace {

// Replace the last column by minus the sum of the others.
void close_zero_sum(Eigen::MatrixXd& m) {
  const Eigen::Index last = m.cols() - 1;
  if (last < 1) return;
  m.col(last) = -m.leftCols(last).rowwise().sum();
}

}  // namespace

EnsembleProblem::EnsembleProblem(Eigen::MatrixXd forward, Eigen::VectorXd observation, Eigen::MatrixXd noise_cov)
    : forward_(std::move(forward)), observation_(std::move(observation)), noise_cov_(std::move(noise_cov)) {
  const Eigen::Index K = forward_.rows();
  if (forward_.cols() < 1 || K < 1) throw UsageError("enkf: forward map must be non-empty");
  if (observation_.size() != K) throw UsageError("enkf: observation size must match forward map rows");
  if (noise_cov_.rows() != K || noise_cov_.cols() != K) throw UsageError("enkf: noise covariance must be K x K");
  if (!forward_.allFinite() || !observation_.allFinite() || !noise_cov_.allFinite()) {
    throw UsageError("enkf: non-finite problem data");
  }
  if (noise_cov_ != noise_cov_.transpose()) {
    throw DomainError("enkf: noise covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise_cov_);
  if (eig.info() != Eigen::Success) throw std::runtime_error("enkf: eigendecomposition of noise covariance failed");
  if (eig.eigenvalues().minCoeff() <= 0.0) throw DomainError("enkf: noise covariance must be positive definite");
  noise_sqrt_ = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  noise_chol_.compute(noise_cov_);
  if (noise_chol_.info() != Eigen::Success) throw DomainError("enkf: noise covariance must be positive definite");
}

double EnsembleProblem::misfit(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd r = observation_ - forward_ * u;
  return noise_chol_.matrixL().solve(r).norm();
}

EnsembleState::EnsembleState(Eigen::VectorXd mean, Eigen::MatrixXd anomalies, double h)
    : mean_(std::move(mean)), anomalies_(std::move(anomalies)), h_(h) {
  if (anomalies_.cols() < 2) throw UsageError("enkf: ensemble needs J >= 2");
  if (anomalies_.rows() != mean_.size() || mean_.size() < 1) throw UsageError("enkf: dimension mismatch");
  if (!(h_ >= 0.0) || !std::isfinite(h_)) throw UsageError("enkf: h must be finite and nonnegative");
  close_zero_sum(anomalies_);
}

EnsembleState EnsembleState::from_particles(const Eigen::MatrixXd& particles, double h) {
  if (particles.cols() < 2) throw UsageError("enkf: ensemble needs J >= 2");
  const Eigen::VectorXd mean = particles.rowwise().sum() * (1.0 / static_cast<double>(particles.cols()));
  Eigen::MatrixXd d = particles.colwise() - mean;
  return EnsembleState(mean, std::move(d), h);
}

Eigen::MatrixXd EnsembleState::particles() const { return anomalies_.colwise() + mean_; }

double EnsembleState::spread() const {
  return std::sqrt(anomalies_.squaredNorm() / static_cast<double>(anomalies_.cols()));
}

CovOperators cov_operators(const EnsembleState& state, const EnsembleProblem& problem) {
  if (state.dim() != problem.dim()) throw UsageError("enkf: state and forward map dimensions differ");
  const Eigen::MatrixXd gd = problem.forward() * state.anomalies();  // K x J
  const double inv_j = 1.0 / static_cast<double>(state.size());
  CovOperators ops;
  ops.cpp = Eigen::MatrixXd::Zero(gd.rows(), gd.rows());
  ops.cup = Eigen::MatrixXd::Zero(state.dim(), gd.rows());
  for (Eigen::Index j = 0; j < state.size(); ++j) {
    ops.cpp += gd.col(j) * gd.col(j).transpose();
    ops.cup += state.anomalies().col(j) * gd.col(j).transpose();
  }
  ops.cpp *= inv_j;
  ops.cup *= inv_j;
  return ops;
}

EnsembleState enkf_step(const EnsembleState& state, const EnsembleProblem& problem, const Eigen::MatrixXd& zeta) {
  const Eigen::Index J = state.size();
  const Eigen::Index K = problem.obs_dim();
  if (zeta.rows() != K || zeta.cols() != J) throw UsageError("enkf: perturbations must be K x J");
  const double h = state.h();
  const CovOperators ops = cov_operators(state, problem);

  const Eigen::MatrixXd s = h * ops.cpp + problem.noise_cov();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("enkf: innovation covariance factorization failed");
  }
  const Eigen::MatrixXd gain = ldlt.solve(ops.cup.transpose()).transpose();  // d x K
  if (!gain.allFinite()) throw std::runtime_error("enkf: non-finite Kalman gain");

  const double inv_j = 1.0 / static_cast<double>(J);
  const double sh = std::sqrt(h);
  const Eigen::VectorXd zbar = zeta.rowwise().sum() * inv_j;
  Eigen::MatrixXd centered = zeta.colwise() - zbar;
  close_zero_sum(centered);

  const Eigen::MatrixXd& g = problem.forward();
  const Eigen::VectorXd innov_mean =
      h * (problem.observation() - g * state.mean()) + sh * (problem.noise_sqrt() * zbar);
  Eigen::VectorXd mean = state.mean() + gain * innov_mean;

  Eigen::MatrixXd anomalies(state.dim(), J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const Eigen::VectorXd innov =
        h * (-(g * state.anomalies().col(j))) + sh * (problem.noise_sqrt() * centered.col(j));
    anomalies.col(j) = state.anomalies().col(j) + gain * innov;
  }
  return EnsembleState(std::move(mean), std::move(anomalies), h);
}

Eigen::MatrixXd ensemble_perturbations(std::uint64_t seed, std::uint64_t chain, std::uint64_t n, Eigen::Index J,
                                       Eigen::Index K) {
  const CounterStream stream(domain_seed(seed, StreamDomain::kEnsemble), 2 * chain);
  Eigen::MatrixXd z(K, J);
  const auto uj = static_cast<std::uint64_t>(J);
  const auto uk = static_cast<std::uint64_t>(K);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) {
      z(k, j) = stream.normal((n * uj + static_cast<std::uint64_t>(j)) * uk + static_cast<std::uint64_t>(k));
    }
  }
  return z;
}

Eigen::MatrixXd initial_particles(std::uint64_t seed, std::uint64_t chain, Eigen::Index d, Eigen::Index J) {
  const CounterStream stream(domain_seed(seed, StreamDomain::kEnsemble), 2 * chain + 1);
  Eigen::MatrixXd p(d, J);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      p(i, j) = stream.normal(static_cast<std::uint64_t>(j * d + i));
    }
  }
  return p;
}

std::vector<EnsembleState> run_enkf(const EnsembleState& initial, const EnsembleProblem& problem, int steps,
                                    std::uint64_t seed, std::uint64_t chain) {
  if (steps < 0) throw UsageError("enkf: steps must be nonnegative");
  std::vector<EnsembleState> states;
  states.reserve(static_cast<std::size_t>(steps) + 1);
  states.push_back(initial);
  for (int n = 0; n < steps; ++n) {
    const Eigen::MatrixXd z =
        ensemble_perturbations(seed, chain, static_cast<std::uint64_t>(n), initial.size(), problem.obs_dim());
    states.push_back(enkf_step(states.back(), problem, z));
  }
  return states;
}

std::vector<double> reduce_to_q(const std::vector<EnsembleState>& states) {
  std::vector<double> q;
  q.reserve(states.size());
  for (const auto& s : states) {
    if (s.size() != 2 || s.dim() != 1) throw UsageError("reduce_to_q: requires J = 2 and d = 1");
    q.push_back(s.anomalies()(0, 0));
  }
  return q;
}

std::vector<double> q_second_moment(std::size_t chains, int steps, double h, std::uint64_t seed, unsigned workers) {
  if (chains == 0) throw UsageError("enkf: chains must be positive");
  const EnsembleProblem problem(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                                Eigen::MatrixXd::Identity(1, 1));
  const auto len = static_cast<std::size_t>(steps) + 1;
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(len, 0.0);
    for (std::size_t c = begin; c < end; ++c) {
      const auto state = EnsembleState::from_particles(initial_particles(seed, c, 1, 2), h);
      const auto q = reduce_to_q(run_enkf(state, problem, steps, seed, c));
      for (std::size_t n = 0; n < len; ++n) acc[n] += q[n] * q[n];
    }
    return acc;
  };
  auto merge = [](std::vector<double>& total, std::vector<double>&& part) {
    if (total.empty()) {
      total = std::move(part);
      return;
    }
    for (std::size_t n = 0; n < total.size(); ++n) total[n] += part[n];
  };
  std::vector<double> total = ordered_reduce(chains, workers, std::vector<double>{}, work, merge);
  for (double& v : total) v /= static_cast<double>(chains);
  return total;
}

}  // namespace tamed
