#include "setcover/theory/gaussian_certificate.hpp"

#include <cmath>
#include <random>

#include "setcover/error.hpp"
#include "setcover/recall.hpp"
#include "setcover/theory/normal.hpp"

namespace setcover::theory {

std::vector<bool> realized_assignment(const std::vector<GaussianDomain>& domains,
                                      const Eigen::MatrixXd& sigma_shared,
                                      const Eigen::VectorXd& theta, double gamma) {
  const double spread = theta.dot(sigma_shared * theta);
  std::vector<bool> out;
  out.reserve(domains.size());
  for (const auto& d : domains) {
    const double p = normal_cdf(theta.dot(d.mu) / std::sqrt(d.sigma * spread));
    out.push_back(meets_recall_target(p, gamma));
  }
  return out;
}

AssignmentCertificate gaussian_nonshatter_certificate(const std::vector<GaussianDomain>& domains,
                                                      const Eigen::MatrixXd& sigma_shared,
                                                      double gamma, std::size_t samples,
                                                      std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  const auto d = static_cast<std::size_t>(sigma_shared.rows());
  if (d == 0 || sigma_shared.cols() != sigma_shared.rows()) {
    throw ConfigError("shared covariance must be a non-empty square matrix");
  }
  if (domains.size() != d + 2) {
    throw ConfigError("certificate needs exactly d + 2 = " + std::to_string(d + 2) +
                      " domains, got " + std::to_string(domains.size()));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_shared);
  if (llt.info() != Eigen::Success) throw ConfigError("shared covariance is not positive definite");

  const auto rows = static_cast<Eigen::Index>(d + 1);
  const auto n = static_cast<Eigen::Index>(domains.size());
  Eigen::MatrixXd nu(rows, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& dom = domains[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(dom.mu.size()) != d) throw ConfigError("mean has wrong dimension");
    if (!(dom.sigma > 0.0)) throw ConfigError("domain scale must be positive");
    nu.col(i).head(rows - 1) = dom.mu;
    nu(rows - 1, i) = std::sqrt(dom.sigma);
  }

  // d + 2 vectors in R^{d+1}: the kernel is non-trivial.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(nu, Eigen::ComputeFullV);
  const Eigen::VectorXd beta = svd.matrixV().col(n - 1);
  Eigen::Index pivot = 0;
  if (std::abs(beta(0)) <= 1e-6 * beta.cwiseAbs().maxCoeff()) {
    beta.cwiseAbs().maxCoeff(&pivot);
  }

  AssignmentCertificate cert;
  cert.dim = d;
  cert.gamma = gamma;
  cert.pivot = static_cast<int>(pivot);
  cert.alpha.assign(domains.size(), 0.0);
  cert.assignment.assign(domains.size(), false);
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == pivot) continue;
    const double a = -beta(i) / beta(pivot);
    cert.alpha[static_cast<std::size_t>(i)] = a;
    cert.assignment[static_cast<std::size_t>(i)] = a >= 0.0;
    combo += a * nu.col(i);
  }
  cert.residual = (nu.col(pivot) - combo).cwiseAbs().maxCoeff();
  if (cert.residual > 1e-9) throw Error("linear dependence residual too large");

  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
  cert.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = normal(rng);
    if (realized_assignment(domains, sigma_shared, theta, gamma) == cert.assignment) {
      ++cert.realized;
    }
  }
  return cert;
}

GaussianInstance random_gaussian_instance(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> mean(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  GaussianInstance inst;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  inst.sigma_shared = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  for (std::size_t k = 0; k < dim + 2; ++k) {
    GaussianDomain d;
    d.mu.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) d.mu(i) = mean(rng);
    d.sigma = scale(rng);
    inst.domains.push_back(std::move(d));
  }
  return inst;
}

nlohmann::json certificate_to_json(const AssignmentCertificate& cert) {
  nlohmann::json j;
  j["dim"] = cert.dim;
  j["gamma"] = cert.gamma;
  j["pivot"] = cert.pivot;
  j["alpha"] = cert.alpha;
  std::vector<int> bits;
  for (bool b : cert.assignment) bits.push_back(b ? 1 : 0);
  j["assignment"] = bits;
  j["residual"] = cert.residual;
  j["samples"] = cert.samples;
  j["realized"] = cert.realized;
  return j;
}

}  // namespace setcover::theory
