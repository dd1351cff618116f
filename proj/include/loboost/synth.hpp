#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "loboost/conformal.hpp"
#include "loboost/data.hpp"

namespace loboost::synth {

/// The two one-dimensional Gaussian benchmarks.
///
/// kHeteroscedastic: X ~ U[-2, 2], mean 3 sin(x), piecewise noise level
///   0.8 / 2.0 / 1 / x^2 with breaks at -0.8, 0.1 and 1.4.
/// kGapSupport: X uniform on [-2, -0.5) U (0.8, 2], mean -2x - 1 on the
///   left branch and 2 sin(3x) on the right, noise 0.3 and 0.2 + 0.5 x^2.
enum class Setting { kHeteroscedastic = 1, kGapSupport = 2 };

Setting parse_setting(const std::string& text);
std::string setting_name(Setting s);

struct DgpSpec {
  Setting setting = Setting::kHeteroscedastic;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

bool in_support(Setting s, double x);

/// Throws SupportError outside the support.
double mean_fn(Setting s, double x);
double sigma_fn(Setting s, double x);

/// Population quantile of X, q in [0, 1].
double x_quantile(Setting s, double q);

/// Draws (X, Y) pairs; one feature named "x".
Dataset sample(const DgpSpec& spec);

/// Central 1 - alpha interval of N(mu, sigma^2).
PredictionInterval gaussian_interval(double mu, double sigma, double alpha);

/// mu(x) -/+ z sigma(x) with z the standard-normal 1 - alpha/2 quantile.
PredictionInterval oracle_interval(Setting s, double x, double alpha);

/// Noise-regime label: "seg1".."seg4" for kHeteroscedastic (split at
/// -0.8, 0.1, 1.4, left-closed), "branch1"/"branch2" for kGapSupport.
std::string segment_label(Setting s, double x);

}  // namespace loboost::synth
