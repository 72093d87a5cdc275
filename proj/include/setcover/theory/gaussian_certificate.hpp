#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "setcover/rng.hpp"

namespace setcover::theory {

/// One label's conditional law in a domain: X | Y = y ~ N(mu, sigma * Sigma).
struct GaussianDomain {
  Eigen::VectorXd mu;
  double sigma = 1.0;
};

struct AssignmentCertificate {
  std::size_t dim = 0;
  double gamma = 0.0;
  int pivot = 0;                // index k with nu_k = sum_{i != k} alpha_i nu_i
  std::vector<double> alpha;    // alpha[k] is 0
  std::vector<bool> assignment; // required indicator per domain (true = recall target met)
  double residual = 0.0;        // max-abs error of the dependence
  std::size_t samples = 0;
  std::size_t realized = 0;     // sampled thetas that realize the assignment
};

/// Needs exactly d + 2 domains sharing the SPD matrix `sigma_shared`.
/// Builds nu_i = (mu_i, sqrt(sigma_i)), finds a linear dependence, and
/// checks `samples` random directions theta against the assignment.
AssignmentCertificate gaussian_nonshatter_certificate(const std::vector<GaussianDomain>& domains,
                                                      const Eigen::MatrixXd& sigma_shared,
                                                      double gamma, std::size_t samples,
                                                      std::uint64_t seed);

/// Indicator per domain of P[theta^T X >= 0] >= 1 - gamma, via the normal CDF.
std::vector<bool> realized_assignment(const std::vector<GaussianDomain>& domains,
                                      const Eigen::MatrixXd& sigma_shared,
                                      const Eigen::VectorXd& theta, double gamma);

/// Random instance: d + 2 domains, means in [-1, 1]^d, sigma in [0.5, 2],
/// shared covariance A A^T + 0.5 I.
struct GaussianInstance {
  std::vector<GaussianDomain> domains;
  Eigen::MatrixXd sigma_shared;
};
GaussianInstance random_gaussian_instance(std::size_t dim, Rng& rng);

nlohmann::json certificate_to_json(const AssignmentCertificate& cert);

}  // namespace setcover::theory
