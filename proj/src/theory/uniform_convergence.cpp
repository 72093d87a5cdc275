#include "setcover/theory/uniform_convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "setcover/conformal.hpp"
#include "setcover/csv_io.hpp"
#include "setcover/error.hpp"
#include "setcover/recall.hpp"
#include "setcover/rng.hpp"
#include "setcover/theory/normal.hpp"

namespace setcover::theory {

void UcConfig::validate() const {
  family.validate();
  if (m_values.empty()) throw ConfigError("uc curve needs at least one m value");
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    if (m_values[i] == 0) throw ConfigError("m values must be positive");
    if (i > 0 && m_values[i] <= m_values[i - 1]) throw ConfigError("m values must increase");
  }
  if (trials == 0) throw ConfigError("trials must be positive");
  if (fresh_domains == 0) throw ConfigError("fresh_domains must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (family.max_domain_size == 0) throw ConfigError("domain size must be positive");
}

std::optional<Scorer> fit_feasible_linear(const MultiDomainDataset& data,
                                          const SetCoverConfig& trainer) {
  SetCoverConfig cfg = trainer;
  cfg.architecture = Architecture::linear;
  Scorer scorer = train_setcover(data, cfg).scorer;
  if (!scorer.all_finite()) return std::nullopt;

  const auto scores = group_scores(scorer, data);
  const auto biases = scorer.output_biases();
  for (int y = 0; y < data.num_labels(); ++y) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& block : scores) {
      const auto& group = block[static_cast<std::size_t>(y)];
      if (group.empty()) continue;
      lowest = std::min(lowest, robust_threshold(group, cfg.gamma));
    }
    if (std::isfinite(lowest) && lowest < 0.0) biases[static_cast<std::size_t>(y)] -= lowest;
  }
  if (!scorer.all_finite()) return std::nullopt;
  return scorer;
}

double closed_form_recall(const Scorer& scorer, const GaussianDomainFamily& family,
                          const DomainParams& params, int label) {
  if (scorer.architecture() != Architecture::linear) {
    throw ConfigError("closed-form recall needs a linear scorer");
  }
  const auto d = static_cast<Eigen::Index>(scorer.dim());
  const auto w_flat = scorer.params();  // linear layout starts with W (L x d)
  Eigen::VectorXd w(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    w(k) = w_flat[static_cast<std::size_t>(label) * scorer.dim() + static_cast<std::size_t>(k)];
  }
  const double b = scorer.output_biases()[static_cast<std::size_t>(label)];
  const double mean = w.dot(family.class_mean(params, label)) + b;
  const double var = w.dot(family.covariance(params) * w);
  if (var <= 0.0) return mean >= 0.0 ? 1.0 : 0.0;
  return normal_cdf(mean / std::sqrt(var));
}

double violation_rate(const Scorer& scorer, const GaussianDomainFamily& family,
                      std::span<const DomainParams> fresh, double gamma) {
  if (fresh.empty()) return 0.0;
  std::size_t violations = 0;
  for (const auto& p : fresh) {
    double worst = 1.0;
    for (int y = 0; y < scorer.num_labels(); ++y) {
      worst = std::min(worst, closed_form_recall(scorer, family, p, y));
    }
    if (!meets_recall_target(worst, gamma)) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(fresh.size());
}

std::vector<UcPoint> empirical_uniform_convergence(const UcConfig& config) {
  config.validate();
  const GaussianDomainFamily family(config.family);
  const std::size_t nm = config.m_values.size();
  const std::uint64_t fresh_seed = split_seed(config.seed, 1);
  const std::uint64_t train_seed = split_seed(config.seed, 2);
  const std::uint64_t fit_seed = split_seed(config.seed, 3);

  std::vector<UcPoint> curve;
  for (std::size_t mi = 0; mi < nm; ++mi) {
    UcPoint point;
    point.m = config.m_values[mi];
    double sum = 0.0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      Rng fresh_rng = make_rng(fresh_seed, t);
      std::vector<DomainParams> fresh;
      for (std::size_t f = 0; f < config.fresh_domains; ++f) {
        fresh.push_back(family.sample_params(static_cast<int>(f), fresh_rng));
      }

      const std::uint64_t stream = t * nm + mi;
      Rng rng = make_rng(train_seed, stream);
      MultiDomainDataset data(config.family.dim, LabelSpace(2));
      for (std::size_t e = 0; e < point.m; ++e) {
        const auto params = family.sample_params(static_cast<int>(e), rng);
        data.add_domain(family.sample_block(params, config.family.max_domain_size, rng));
      }
      SetCoverConfig trainer = config.trainer;
      trainer.gamma = config.gamma;
      trainer.seed = split_seed(fit_seed, stream);
      const auto fit = fit_feasible_linear(data, trainer);
      if (!fit) {
        ++point.infeasible;
        continue;
      }
      const double rate = violation_rate(*fit, family, fresh, config.gamma);
      point.per_trial.push_back(rate);
      sum += rate;
    }
    point.trials = point.per_trial.size();
    point.mean_violation = point.trials == 0 ? 0.0 : sum / static_cast<double>(point.trials);
    curve.push_back(std::move(point));
  }
  return curve;
}

void write_uc_csv(std::ostream& out, std::span<const UcPoint> curve) {
  out << "m,trials,infeasible,mean_violation\n";
  for (const auto& p : curve) {
    out << p.m << ',' << p.trials << ',' << p.infeasible << ',' << format_double(p.mean_violation)
        << '\n';
  }
}

}  // namespace setcover::theory
