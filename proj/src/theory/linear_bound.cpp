#include "setcover/theory/linear_bound.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "setcover/error.hpp"
#include "setcover/recall.hpp"
#include "setcover/theory/normal.hpp"

namespace setcover::theory {

OneDimDomain gaussian_1d_domain(std::vector<double> means, std::vector<double> stds) {
  if (means.size() != stds.size() || means.empty()) {
    throw ConfigError("gaussian domain needs one mean and std per label");
  }
  OneDimDomain d;
  for (std::size_t y = 0; y < means.size(); ++y) {
    const double m = means[y];
    const double s = stds[y];
    if (!(s > 0.0)) throw ConfigError("gaussian domain std must be positive");
    d.cdf.push_back([m, s](double x) { return normal_cdf((x - m) / s); });
    d.quantile.push_back([m, s](double p) { return m + s * normal_quantile(p); });
  }
  return d;
}

OneDimDomain random_gaussian_1d_domain(int num_labels, Rng& rng) {
  std::uniform_real_distribution<double> mean(-2.0, 2.0);
  std::uniform_real_distribution<double> sd(0.2, 2.0);
  std::vector<double> means;
  std::vector<double> stds;
  for (int y = 0; y < num_labels; ++y) {
    means.push_back(mean(rng));
    stds.push_back(sd(rng));
  }
  return gaussian_1d_domain(std::move(means), std::move(stds));
}

std::optional<LinearBoundResult> check_1d_linear_bound(const std::vector<OneDimDomain>& domains,
                                                       double gamma,
                                                       std::size_t sweep_count) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (domains.empty()) throw ConfigError("no domains given");
  const int labels = domains.front().num_labels();
  for (const auto& d : domains) {
    if (d.num_labels() != labels || d.quantile.size() != d.cdf.size()) {
      throw ConfigError("domains disagree on the label count");
    }
  }
  const std::size_t n = domains.size();
  if (n <= 2 * static_cast<std::size_t>(labels)) return std::nullopt;

  LinearBoundResult r;
  std::vector<bool> extreme(n, false);
  for (int y = 0; y < labels; ++y) {
    const auto yi = static_cast<std::size_t>(y);
    int best_max = 0;
    int best_min = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (domains[i].quantile[yi](1.0 - gamma) >
          domains[static_cast<std::size_t>(best_max)].quantile[yi](1.0 - gamma)) {
        best_max = static_cast<int>(i);
      }
      if (domains[i].quantile[yi](gamma) <
          domains[static_cast<std::size_t>(best_min)].quantile[yi](gamma)) {
        best_min = static_cast<int>(i);
      }
    }
    r.i_max.push_back(best_max);
    r.i_min.push_back(best_min);
    extreme[static_cast<std::size_t>(best_max)] = true;
    extreme[static_cast<std::size_t>(best_min)] = true;
  }
  r.must_succeed = extreme;
  for (std::size_t i = 0; i < n; ++i) {
    if (!extreme[i]) {
      r.witness = static_cast<int>(i);
      break;
    }
  }

  // Realizing the assignment needs some label y whose classifier clears the
  // target on every extreme domain yet misses it on the witness.
  const auto w = static_cast<std::size_t>(r.witness);
  for (int y = 0; y < labels; ++y) {
    const auto yi = static_cast<std::size_t>(y);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& d : domains) {
      lo = std::min(lo, d.quantile[yi](1e-9));
      hi = std::max(hi, d.quantile[yi](1.0 - 1e-9));
    }
    lo -= 1.0;
    hi += 1.0;
    for (std::size_t k = 0; k < sweep_count; ++k) {
      const double a =
          sweep_count == 1 ? lo
                           : lo + (hi - lo) * static_cast<double>(k) /
                                      static_cast<double>(sweep_count - 1);
      // Orientation 0 predicts 1 on x < a; orientation 1 on x >= a.
      for (int orientation = 0; orientation < 2; ++orientation) {
        auto recall = [&](std::size_t i) {
          const double below = domains[i].cdf[yi](a);
          return orientation == 0 ? below : 1.0 - below;
        };
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
          if (extreme[i] && !meets_recall_target(recall(i), gamma)) ok = false;
        }
        if (ok && !meets_recall_target(recall(w), gamma)) r.achiever_found = true;
        ++r.thresholds_checked;
      }
    }
  }
  return r;
}

}  // namespace setcover::theory
