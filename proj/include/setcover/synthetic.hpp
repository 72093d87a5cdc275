#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "setcover/dataset.hpp"
#include "setcover/kv_config.hpp"
#include "setcover/rng.hpp"

namespace setcover {

/// Parameters of the conditionally Gaussian domain family
///   Z_e ~ U[u_low, u_high],  Y ~ Bernoulli(0.5),  X = Y (mu + Z_e nu) + noise.
///
/// Plain mode: noise ~ N(0, sigma * I), i.e. `sigma` is the diagonal *variance*.
/// Random-covariance mode: per domain, noise ~ N(0, Q^T D Q) where D holds
/// squared Normal(sigma, cov_std) draws (so `sigma` acts as a std) and Q is
/// a uniformly random rotation.
struct SyntheticConfig {
  std::size_t dim = 10;
  double u_low = -0.5;
  double u_high = 0.5;
  std::vector<double> mu;
  std::vector<double> nu;
  double sigma = 0.2;
  bool random_covariance = false;
  double cov_std = 0.05;
  std::size_t n_train_domains = 25;
  std::size_t n_test_domains = 25;
  std::size_t max_domain_size = 2000;
  std::size_t max_test_domain_size = 1000;
  std::uint64_t seed = 0;

  /// d = 10 benchmark: mu = 0.1, nu = (1,..,1, -1,..,-1), sigma = 0.2, Z in [-0.5, 0.5].
  static SyntheticConfig benchmark_10d();
  /// d = 50 benchmark: mu = 0.05, nu = (1,..,1, -1,..,-1), sigma = 0.25, Z in [-0.3, 0.3].
  static SyntheticConfig benchmark_50d();

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

/// `nu` built as the concatenation (nu1, nu2) of two constant halves; dim must be even.
std::vector<double> split_nu(std::size_t dim, double nu1, double nu2);

/// Reads a SyntheticConfig from flat keys mirroring the field names.
/// `profile = 10d|50d` selects a benchmark base; `mu`/`nu` accept a list or a
/// scalar broadcast to `dim`; `nu1`/`nu2` build the split form.
SyntheticConfig synthetic_config_from(const KeyValueConfig& kv);

/// One realized domain of the family.
struct DomainParams {
  int domain_id = 0;
  double z = 0.0;
  std::vector<double> noise_scale;  // per-axis std before rotation
  Eigen::MatrixXd rotation;         // empty in plain mode
};

class GaussianDomainFamily {
 public:
  explicit GaussianDomainFamily(SyntheticConfig config);

  const SyntheticConfig& config() const { return config_; }

  DomainParams sample_params(int domain_id, Rng& rng) const;
  DomainBlock sample_block(const DomainParams& params, std::size_t n, Rng& rng) const;

  /// E[X | Y = label] in the given domain.
  Eigen::VectorXd class_mean(const DomainParams& params, int label) const;
  /// Noise covariance of the domain (shared by both labels).
  Eigen::MatrixXd covariance(const DomainParams& params) const;

 private:
  SyntheticConfig config_;
};

/// Uniform (Haar) random rotation: QR of a Gaussian matrix, sign-corrected,
/// with det = +1.
Eigen::MatrixXd random_rotation(std::size_t dim, Rng& rng);

struct SyntheticData {
  MultiDomainDataset train;
  MultiDomainDataset test;
  std::vector<DomainParams> train_params;
  std::vector<DomainParams> test_params;
};

/// Training domains get ids 0..n_train-1 and test domains n_train..; each
/// domain draws from its own stream split from `config.seed`.
SyntheticData generate_synthetic(const SyntheticConfig& config);

}  // namespace setcover
