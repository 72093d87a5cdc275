#include "setcover/synthetic.hpp"

#include <cmath>
#include <string>

#include "setcover/error.hpp"

namespace setcover {
namespace {

std::vector<double> broadcast(const KeyValueConfig& kv, const std::string& key,
                              std::size_t dim) {
  auto values = kv.get_doubles(key);
  if (values.size() == 1) values.assign(dim, values.front());
  return values;
}

}  // namespace

std::vector<double> split_nu(std::size_t dim, double nu1, double nu2) {
  if (dim % 2 != 0) throw ConfigError("nu1/nu2 split needs an even dimension");
  std::vector<double> nu(dim, nu1);
  for (std::size_t i = dim / 2; i < dim; ++i) nu[i] = nu2;
  return nu;
}

SyntheticConfig SyntheticConfig::benchmark_10d() {
  SyntheticConfig c;
  c.dim = 10;
  c.u_low = -0.5;
  c.u_high = 0.5;
  c.mu.assign(10, 0.1);
  c.nu = split_nu(10, 1.0, -1.0);
  c.sigma = 0.2;
  return c;
}

SyntheticConfig SyntheticConfig::benchmark_50d() {
  SyntheticConfig c;
  c.dim = 50;
  c.u_low = -0.3;
  c.u_high = 0.3;
  c.mu.assign(50, 0.05);
  c.nu = split_nu(50, 1.0, -1.0);
  c.sigma = 0.25;
  return c;
}

void SyntheticConfig::validate() const {
  if (dim == 0) throw ConfigError("dim must be positive");
  if (!(u_low <= u_high)) throw ConfigError("u_low must not exceed u_high");
  if (mu.size() != dim) throw ConfigError("mu length does not match dim");
  if (nu.size() != dim) throw ConfigError("nu length does not match dim");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(cov_std >= 0.0)) throw ConfigError("cov_std must be non-negative");
  if (max_domain_size == 0 || (n_test_domains > 0 && max_test_domain_size == 0)) {
    throw ConfigError("domain sizes must be positive");
  }
}

SyntheticConfig synthetic_config_from(const KeyValueConfig& kv) {
  const std::string profile = kv.get_string("profile", "10d");
  SyntheticConfig c;
  if (profile == "10d") {
    c = SyntheticConfig::benchmark_10d();
  } else if (profile == "50d") {
    c = SyntheticConfig::benchmark_50d();
  } else {
    throw ConfigError("unknown synthetic profile '" + profile + "'");
  }
  const auto old_dim = c.dim;
  c.dim = static_cast<std::size_t>(kv.get_int("dim", static_cast<std::int64_t>(c.dim)));
  if (c.dim != old_dim) {
    // Rescale the profile vectors to the requested dimension.
    c.mu.assign(c.dim, c.mu.front());
    if (c.dim % 2 == 0) {
      c.nu = split_nu(c.dim, 1.0, -1.0);
    } else {
      c.nu.assign(c.dim, 1.0);
    }
  }
  c.u_low = kv.get_double("u_low", c.u_low);
  c.u_high = kv.get_double("u_high", c.u_high);
  if (kv.has("mu")) c.mu = broadcast(kv, "mu", c.dim);
  if (kv.has("nu")) c.nu = broadcast(kv, "nu", c.dim);
  if (kv.has("nu1") || kv.has("nu2")) {
    c.nu = split_nu(c.dim, kv.get_double("nu1", 1.0), kv.get_double("nu2", -1.0));
  }
  c.sigma = kv.get_double("sigma", c.sigma);
  c.random_covariance = kv.get_bool("random_covariance", c.random_covariance);
  c.cov_std = kv.get_double("cov_std", c.cov_std);
  auto size_key = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.n_train_domains = size_key("n_train_domains", c.n_train_domains);
  c.n_test_domains = size_key("n_test_domains", c.n_test_domains);
  c.max_domain_size = size_key("max_domain_size", c.max_domain_size);
  c.max_test_domain_size = size_key("max_test_domain_size", c.max_test_domain_size);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

GaussianDomainFamily::GaussianDomainFamily(SyntheticConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

Eigen::MatrixXd random_rotation(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

DomainParams GaussianDomainFamily::sample_params(int domain_id, Rng& rng) const {
  DomainParams p;
  p.domain_id = domain_id;
  std::uniform_real_distribution<double> uniform(config_.u_low, config_.u_high);
  p.z = config_.u_low == config_.u_high ? config_.u_low : uniform(rng);
  if (config_.random_covariance) {
    std::normal_distribution<double> scale(config_.sigma, config_.cov_std);
    p.noise_scale.resize(config_.dim);
    // The draw is a std; its square is the variance. |draw| keeps the same square.
    for (auto& s : p.noise_scale) s = std::abs(scale(rng));
    p.rotation = random_rotation(config_.dim, rng);
  } else {
    p.noise_scale.assign(config_.dim, std::sqrt(config_.sigma));
  }
  return p;
}

Eigen::VectorXd GaussianDomainFamily::class_mean(const DomainParams& params,
                                                 int label) const {
  const auto n = static_cast<Eigen::Index>(config_.dim);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  if (label == 0) return m;
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i) = label * (config_.mu[static_cast<std::size_t>(i)] +
                    params.z * config_.nu[static_cast<std::size_t>(i)]);
  }
  return m;
}

Eigen::MatrixXd GaussianDomainFamily::covariance(const DomainParams& params) const {
  const auto n = static_cast<Eigen::Index>(config_.dim);
  Eigen::VectorXd var(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = params.noise_scale[static_cast<std::size_t>(i)];
    var(i) = s * s;
  }
  if (params.rotation.size() == 0) return var.asDiagonal();
  const Eigen::MatrixXd& q = params.rotation;
  return q.transpose() * var.asDiagonal() * q;
}

DomainBlock GaussianDomainFamily::sample_block(const DomainParams& params, std::size_t n,
                                               Rng& rng) const {
  const std::size_t d = config_.dim;
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  DomainBlock block;
  block.domain_id = params.domain_id;
  block.labels.resize(n);
  block.features.resize(n * d);
  const bool rotated = params.rotation.size() != 0;
  Eigen::VectorXd scaled(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = coin(rng) ? 1 : 0;
    block.labels[i] = y;
    for (std::size_t k = 0; k < d; ++k) {
      scaled(static_cast<Eigen::Index>(k)) = params.noise_scale[k] * normal(rng);
    }
    double* row = block.features.data() + i * d;
    if (rotated) {
      // noise = Q^T D^{1/2} g has covariance Q^T D Q.
      const Eigen::VectorXd noise = params.rotation.transpose() * scaled;
      for (std::size_t k = 0; k < d; ++k) row[k] = noise(static_cast<Eigen::Index>(k));
    } else {
      for (std::size_t k = 0; k < d; ++k) row[k] = scaled(static_cast<Eigen::Index>(k));
    }
    if (y == 1) {
      for (std::size_t k = 0; k < d; ++k) row[k] += config_.mu[k] + params.z * config_.nu[k];
    }
  }
  return block;
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  GaussianDomainFamily family(config);
  SyntheticData out;
  out.train = MultiDomainDataset(config.dim, LabelSpace(2));
  out.test = MultiDomainDataset(config.dim, LabelSpace(2));
  for (std::size_t k = 0; k < config.n_train_domains; ++k) {
    Rng rng = make_rng(config.seed, 2 * k);
    auto params = family.sample_params(static_cast<int>(k), rng);
    out.train.add_domain(family.sample_block(params, config.max_domain_size, rng));
    out.train_params.push_back(std::move(params));
  }
  for (std::size_t k = 0; k < config.n_test_domains; ++k) {
    Rng rng = make_rng(config.seed, 2 * k + 1);
    const int id = static_cast<int>(config.n_train_domains + k);
    auto params = family.sample_params(id, rng);
    out.test.add_domain(family.sample_block(params, config.max_test_domain_size, rng));
    out.test_params.push_back(std::move(params));
  }
  return out;
}

}  // namespace setcover
