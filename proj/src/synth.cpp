#include "loboost/synth.hpp"

#include <cmath>
#include <vector>

#include "loboost/errors.hpp"
#include "loboost/normal.hpp"
#include "loboost/rng.hpp"

namespace loboost::synth {

Setting parse_setting(const std::string& text) {
  if (text == "1" || text == "heteroscedastic" || text == "setting1") {
    return Setting::kHeteroscedastic;
  }
  if (text == "2" || text == "gap" || text == "setting2") return Setting::kGapSupport;
  throw ConfigError("unknown DGP '" + text + "' (use 1 or 2)");
}

std::string setting_name(Setting s) {
  return s == Setting::kHeteroscedastic ? "1" : "2";
}

bool in_support(Setting s, double x) {
  if (s == Setting::kHeteroscedastic) return x >= -2.0 && x <= 2.0;
  return (x >= -2.0 && x < -0.5) || (x > 0.8 && x <= 2.0);
}

namespace {
void require_support(Setting s, double x) {
  if (!in_support(s, x)) {
    throw SupportError("x = " + std::to_string(x) + " is outside the support of setting " +
                       setting_name(s));
  }
}
}  // namespace

double mean_fn(Setting s, double x) {
  require_support(s, x);
  if (s == Setting::kHeteroscedastic) return 3.0 * std::sin(x);
  return x < -0.5 ? -2.0 * x - 1.0 : 2.0 * std::sin(3.0 * x);
}

double sigma_fn(Setting s, double x) {
  require_support(s, x);
  if (s == Setting::kHeteroscedastic) {
    if (x < -0.8) return 0.8;
    if (x < 0.1) return 2.0;
    if (x < 1.4) return 1.0;
    return x * x;
  }
  return x < -0.5 ? 0.3 : 0.2 + 0.5 * x * x;
}

double x_quantile(Setting s, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
  if (s == Setting::kHeteroscedastic) return -2.0 + 4.0 * q;
  const double mass = q * 2.7;
  return mass < 1.5 ? -2.0 + mass : 0.8 + (mass - 1.5);
}

Dataset sample(const DgpSpec& spec) {
  if (spec.n == 0) throw ConfigError("sample size must be positive");
  RngStream xs = RngStream(spec.seed).derive("dgp:x");
  RngStream zs = RngStream(spec.seed).derive("dgp:noise");
  std::vector<double> x(spec.n);
  std::vector<double> y(spec.n);
  constexpr double kLeft = 1.5;    // |[-2, -0.5)|
  constexpr double kTotal = 2.7;   // plus |(0.8, 2]|
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = xs.uniform();
    double v;
    if (spec.setting == Setting::kHeteroscedastic) {
      v = -2.0 + 4.0 * u;
    } else {
      const double s = u * kTotal;
      if (s < kLeft) {
        v = -2.0 + s;
        if (v >= -0.5) v = std::nextafter(-0.5, -1.0);
      } else {
        v = 2.0 - (s - kLeft);
        if (v <= 0.8) v = std::nextafter(0.8, 1.0);
      }
    }
    x[i] = v;
    y[i] = mean_fn(spec.setting, v) + sigma_fn(spec.setting, v) * zs.normal();
  }
  return Dataset(std::move(x), 1, std::move(y), {"x"});
}

PredictionInterval gaussian_interval(double mu, double sigma, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  const double half = normal_quantile(1.0 - alpha / 2.0) * sigma;
  return {mu - half, mu + half, mu};
}

PredictionInterval oracle_interval(Setting s, double x, double alpha) {
  return gaussian_interval(mean_fn(s, x), sigma_fn(s, x), alpha);
}

std::string segment_label(Setting s, double x) {
  require_support(s, x);
  if (s == Setting::kHeteroscedastic) {
    if (x < -0.8) return "seg1";
    if (x < 0.1) return "seg2";
    if (x < 1.4) return "seg3";
    return "seg4";
  }
  return x < -0.5 ? "branch1" : "branch2";
}

}  // namespace loboost::synth
