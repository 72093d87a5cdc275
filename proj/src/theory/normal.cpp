#include "setcover/theory/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "setcover/error.hpp"

namespace setcover::theory {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace setcover::theory
