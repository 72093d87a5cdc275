#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "setcover/rng.hpp"

namespace setcover::theory {

/// A 1-d domain described by its per-label conditional CDF F(x) = P[X < x | Y = y]
/// and quantile function F^{-1}.
struct OneDimDomain {
  std::vector<std::function<double(double)>> cdf;
  std::vector<std::function<double(double)>> quantile;
  int num_labels() const { return static_cast<int>(cdf.size()); }
};

/// X | Y = y ~ N(means[y], stds[y]^2).
OneDimDomain gaussian_1d_domain(std::vector<double> means, std::vector<double> stds);

/// Random Gaussian 1-d domain with means in [-2, 2] and stds in [0.2, 2].
OneDimDomain random_gaussian_1d_domain(int num_labels, Rng& rng);

struct LinearBoundResult {
  std::vector<int> i_max;  // per label, argmax_i F_i^{-1}(1 - gamma)
  std::vector<int> i_min;  // per label, argmin_i F_i^{-1}(gamma)
  /// true: the domain must meet the recall target; false: it must miss it.
  std::vector<bool> must_succeed;
  int witness = -1;
  std::size_t thresholds_checked = 0;
  bool achiever_found = false;  // a threshold classifier realizing the assignment
};

/// Returns nullopt when there are at most 2|Y| domains. Otherwise returns
/// the assignment "every extreme domain succeeds, all other domains fail",
/// which no threshold classifier realizes, and a sweep of `sweep_count`
/// thresholds per orientation and label looking for a counterexample.
std::optional<LinearBoundResult> check_1d_linear_bound(const std::vector<OneDimDomain>& domains,
                                                       double gamma,
                                                       std::size_t sweep_count = 10000);

}  // namespace setcover::theory
