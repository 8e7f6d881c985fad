#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace tamed {

// Linear inverse problem y = G u + noise, noise ~ N(0, Gamma), u in R^d, y in R^K.
// G is stored as a K x d matrix so that G * u is the forward map.
class EnsembleProblem {
 public:
  EnsembleProblem(Eigen::MatrixXd forward, Eigen::VectorXd observation, Eigen::MatrixXd noise_cov);

  const Eigen::MatrixXd& forward() const noexcept { return forward_; }
  const Eigen::VectorXd& observation() const noexcept { return observation_; }
  const Eigen::MatrixXd& noise_cov() const noexcept { return noise_cov_; }
  const Eigen::MatrixXd& noise_sqrt() const noexcept { return noise_sqrt_; }  // symmetric square root
  Eigen::Index dim() const noexcept { return forward_.cols(); }
  Eigen::Index obs_dim() const noexcept { return forward_.rows(); }

  // || Gamma^{-1/2} (y - G u) ||
  double misfit(const Eigen::VectorXd& u) const;

 private:
  Eigen::MatrixXd forward_;
  Eigen::VectorXd observation_;
  Eigen::MatrixXd noise_cov_;
  Eigen::MatrixXd noise_sqrt_;
  Eigen::LLT<Eigen::MatrixXd> noise_chol_;
};

// Ensemble kept as mean plus anomalies d_j = u_j - mean. The last anomaly is
// always minus the sum of the others, so the anomalies sum to zero exactly.
class EnsembleState {
 public:
  EnsembleState(Eigen::VectorXd mean, Eigen::MatrixXd anomalies, double h);
  static EnsembleState from_particles(const Eigen::MatrixXd& particles, double h);  // d x J

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& anomalies() const noexcept { return anomalies_; }  // d x J
  double h() const noexcept { return h_; }
  Eigen::Index size() const noexcept { return anomalies_.cols(); }
  Eigen::Index dim() const noexcept { return anomalies_.rows(); }
  Eigen::MatrixXd particles() const;
  // sqrt((1/J) sum_j |d_j|^2)
  double spread() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd anomalies_;
  double h_;
};

struct CovOperators {
  Eigen::MatrixXd cpp;  // K x K, (1/J) sum (G d_j)(G d_j)^T
  Eigen::MatrixXd cup;  // d x K, (1/J) sum d_j (G d_j)^T
};

CovOperators cov_operators(const EnsembleState& state, const EnsembleProblem& problem);

// One perturbed-observation step, zeta is K x J with one standard normal
// column per particle:
//   u_j += K_n (h (y - G u_j) + sqrt(h) Gamma^{1/2} zeta_j),
//   K_n = Cup (h Cpp + Gamma)^{-1} via a factorized solve.
EnsembleState enkf_step(const EnsembleState& state, const EnsembleProblem& problem, const Eigen::MatrixXd& zeta);

// Perturbations for step n of chain `chain`: entry (k, j) is the standard
// normal at index (n J + j) K + k of the chain's ensemble stream.
Eigen::MatrixXd ensemble_perturbations(std::uint64_t seed, std::uint64_t chain, std::uint64_t n,
                                       Eigen::Index J, Eigen::Index K);

// Initial ensemble for a chain: J standard normal particles in R^d, drawn from
// a stream disjoint from the perturbations.
Eigen::MatrixXd initial_particles(std::uint64_t seed, std::uint64_t chain, Eigen::Index d, Eigen::Index J);

// Runs `steps` steps, returning steps + 1 states.
std::vector<EnsembleState> run_enkf(const EnsembleState& initial, const EnsembleProblem& problem, int steps,
                                    std::uint64_t seed, std::uint64_t chain = 0);

// q_n = u_n^(1) - mean_n; requires J = 2 and d = 1.
std::vector<double> reduce_to_q(const std::vector<EnsembleState>& states);

// Mean of q_n^2 over independent chains, n = 0..steps, for the scalar toy problem
// d = K = 1, G = 1, Gamma = 1, J = 2.
std::vector<double> q_second_moment(std::size_t chains, int steps, double h, std::uint64_t seed,
                                    unsigned workers = 0);

}  // namespace tamed
