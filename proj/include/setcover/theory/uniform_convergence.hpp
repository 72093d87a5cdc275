#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "setcover/dataset.hpp"
#include "setcover/scorer.hpp"
#include "setcover/setcover.hpp"
#include "setcover/synthetic.hpp"

namespace setcover::theory {

struct UcConfig {
  SyntheticConfig family = SyntheticConfig::benchmark_10d();
  std::vector<std::size_t> m_values{5, 10, 20, 40};
  std::size_t trials = 20;
  double gamma = 0.1;
  std::size_t fresh_domains = 200;
  /// Trainer settings; the architecture is forced to linear.
  SetCoverConfig trainer;
  std::uint64_t seed = 0;

  void validate() const;
};

struct UcPoint {
  std::size_t m = 0;
  std::size_t trials = 0;      // fits that entered the mean
  std::size_t infeasible = 0;  // fits excluded from the mean
  double mean_violation = 0.0;
  std::vector<double> per_trial;
};

/// Fits a linear SET-COVER scorer, then raises each label's bias just enough
/// that every training (domain, label) group reaches recall >= 1 - gamma
/// under the >= 0 rule. nullopt if the fit has non-finite parameters.
std::optional<Scorer> fit_feasible_linear(const MultiDomainDataset& data,
                                          const SetCoverConfig& trainer);

/// P[h_label(X) >= 0 | Y = label] for a linear scorer, in closed form.
double closed_form_recall(const Scorer& scorer, const GaussianDomainFamily& family,
                          const DomainParams& params, int label);

/// Fraction of `fresh` domains whose worst label misses recall 1 - gamma.
double violation_rate(const Scorer& scorer, const GaussianDomainFamily& family,
                      std::span<const DomainParams> fresh, double gamma);

std::vector<UcPoint> empirical_uniform_convergence(const UcConfig& config);

/// CSV columns: m,trials,infeasible,mean_violation.
void write_uc_csv(std::ostream& out, std::span<const UcPoint> curve);

}  // namespace setcover::theory
