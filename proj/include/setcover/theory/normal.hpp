#pragma once

namespace setcover::theory {

/// Standard normal CDF.
double normal_cdf(double x);
/// Standard normal quantile; p in (0, 1).
double normal_quantile(double p);

}  // namespace setcover::theory
