#pragma once

namespace loboost {

/// Standard normal CDF via std::erfc.
double normal_cdf(double x);

/// Inverse of the standard normal CDF on (0, 1).
///
/// Acklam's rational approximation (relative error ~1.15e-9) followed by
/// one Halley step against normal_cdf, which brings the absolute error
/// below 1e-12 across the open interval. Returns -inf/+inf at 0/1.
double normal_quantile(double p);

}  // namespace loboost
