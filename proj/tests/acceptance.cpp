// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "loboost/conformal.hpp"
#include "loboost/diagnostics.hpp"
#include "loboost/experiment.hpp"
#include "loboost/gbm.hpp"
#include "loboost/metrics.hpp"
#include "loboost/partition.hpp"
#include "loboost/rng.hpp"
#include "loboost/synth.hpp"

namespace fs = std::filesystem;
using namespace loboost;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// The 50-replication Setting 1 study shared by several criteria.
struct Study {
  std::vector<ReplicationResult> runs;
  double seconds = 0.0;
  std::size_t n_cal_total = 0;
};

Study run_study() {
  ExperimentConfig cfg;
  cfg.command = Command::kSimulate;
  cfg.dgp = synth::Setting::kHeteroscedastic;
  cfg.n = 3000;
  cfg.replications = 50;
  cfg.pipeline.alpha = 0.1;
  Study s;
  const auto start = Clock::now();
  for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
    s.runs.push_back(simulate_replication(cfg, rep));
  }
  s.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return s;
}

Verdict marginal_validity(const Study& s) {
  std::vector<double> icp;
  std::vector<double> lob;
  for (const auto& r : s.runs) {
    icp.push_back(r.icp.amc);
    lob.push_back(r.loboost.amc);
  }
  const double a = mean_of(icp);
  const double b = mean_of(lob);
  const bool ok = a >= 0.885 && a <= 0.915 && b >= 0.885 && b <= 0.915 && s.seconds < 120.0;
  return {ok, "AMC icp=" + fmt("%.4f", a) + " loboost=" + fmt("%.4f", b) +
                  " (target [0.885, 0.915]), runtime " + fmt("%.1f", s.seconds) + " s (< 120)"};
}

// Fixed model and partition; every replication draws a fresh calibration
// sample and a fresh test sample, so per-region coverage is an average over
// exchangeable draws.
Verdict local_coverage_sandwich() {
  const double alpha = 0.1;
  const std::size_t reps = 200;
  const auto setting = synth::Setting::kHeteroscedastic;
  const RngStream root(20240601);

  const Dataset pilot = synth::sample({setting, 3000, root.derive("pilot").next_u64()});
  SplitSpec spec;
  spec.seed = root.derive("pilot-split").next_u64();
  const DataSplit parts = split(pilot, spec, true);
  BoostConfig boost;
  boost.seed = root.derive("pilot-boost").next_u64();
  const BoostedEnsemble model = fit(parts.train, boost);
  const std::size_t n_cal = parts.cal.rows();

  std::ostringstream detail;
  bool ok = true;
  std::size_t checked = 0;
  for (std::size_t m_size : {std::size_t{200}, std::size_t{100}}) {
    const PartitionModel raw = build_partition(model.leaf_paths(parts.cal), m_size);
    const auto w = compute_tree_weights(model, parts.cal, WeightScheme::variance());
    const PartitionModel partition = merge_regions(raw, m_size, w);
    const std::size_t k = partition.n_regions();

    std::vector<std::vector<double>> cov(k);
    std::vector<std::vector<double>> inv_m(k);
    for (std::size_t r = 0; r < reps; ++r) {
      const RngStream rep_rng = root.derive("sandwich:" + std::to_string(m_size) + ":" +
                                            std::to_string(r));
      const Dataset cal = synth::sample({setting, n_cal, rep_rng.derive("cal").next_u64()});
      const Dataset test = synth::sample({setting, 3000, rep_rng.derive("test").next_u64()});
      const LocalCalibrator lc = calibrate_local_routed(model, partition, cal, alpha);
      std::vector<std::size_t> hit(k, 0);
      std::vector<std::size_t> tot(k, 0);
      for (std::size_t i = 0; i < test.rows(); ++i) {
        const RegionId g = locate(partition, model.leaf_path(test.row(i)));
        const auto iv = make_interval(model.predict(test.row(i)), lc.region_quantiles[g]);
        hit[g] += iv.contains(test.target(i));
        ++tot[g];
      }
      for (std::size_t g = 0; g < k; ++g) {
        if (tot[g] == 0) continue;
        cov[g].push_back(static_cast<double>(hit[g]) / static_cast<double>(tot[g]));
        inv_m[g].push_back(1.0 / (static_cast<double>(lc.region_counts[g]) + 1.0));
      }
    }
    for (std::size_t g = 0; g < k; ++g) {
      if (partition.regions()[g].members.size() < 100 || cov[g].size() < 2) continue;
      ++checked;
      const double c = mean_of(cov[g]);
      const double se = sd_of(cov[g]) / std::sqrt(static_cast<double>(cov[g].size()));
      const double lo = 1.0 - alpha - 3.0 * se;
      const double hi = 1.0 - alpha + mean_of(inv_m[g]) + 3.0 * se;
      const bool in = c >= lo && c <= hi;
      ok = ok && in;
      detail << " M=" << m_size << "/r" << g << " m=" << partition.regions()[g].members.size()
             << " cov=" << fmt("%.4f", c) << " in [" << fmt("%.4f", lo) << ", "
             << fmt("%.4f", hi) << "]" << (in ? "" : " VIOLATED") << ";";
    }
  }
  ok = ok && checked > 0;
  return {ok, std::to_string(checked) + " regions checked over " + std::to_string(reps) +
                  " replications:" + detail.str()};
}

Verdict conditional_adaptivity(const Study& s) {
  const std::vector<std::string> segs{"seg1", "seg2", "seg3", "seg4"};
  std::map<std::string, std::vector<double>> icp;
  std::map<std::string, std::vector<double>> lob;
  for (const auto& r : s.runs) {
    for (const auto& g : segs) {
      if (r.icp.per_group_coverage.count(g)) icp[g].push_back(r.icp.per_group_coverage.at(g));
      if (r.loboost.per_group_coverage.count(g)) {
        lob[g].push_back(r.loboost.per_group_coverage.at(g));
      }
    }
  }
  double dev_icp = 0.0;
  double dev_lob = 0.0;
  for (const auto& g : segs) {
    dev_icp += std::abs(mean_of(icp[g]) - 0.9) / 4.0;
    dev_lob += std::abs(mean_of(lob[g]) - 0.9) / 4.0;
  }
  const double icp1 = mean_of(icp["seg1"]);
  const double icp2 = mean_of(icp["seg2"]);
  const bool ok = dev_lob < dev_icp && icp1 > 0.92 && icp2 < 0.88;
  std::ostringstream d;
  d << "mean |cov-0.9| loboost=" << fmt("%.4f", dev_lob) << " icp=" << fmt("%.4f", dev_icp)
    << "; icp seg1=" << fmt("%.3f", icp1) << " (> 0.92), seg2=" << fmt("%.3f", icp2)
    << " (< 0.88); loboost by segment";
  for (const auto& g : segs) d << ' ' << fmt("%.3f", mean_of(lob[g]));
  return {ok, d.str()};
}

Verdict interval_quality(const Study& s) {
  std::vector<double> icp;
  std::vector<double> lob;
  for (const auto& r : s.runs) {
    icp.push_back(r.icp.smis);
    lob.push_back(r.loboost.smis);
  }
  const double a = mean_of(icp);
  const double b = mean_of(lob);
  return {b <= a, "mean SMIS loboost=" + fmt("%.4f", b) + " icp=" + fmt("%.4f", a)};
}

Verdict decay_diagnostic() {
  ExperimentConfig cfg;
  cfg.command = Command::kDiagnose;
  cfg.dgp = synth::Setting::kHeteroscedastic;
  cfg.n = 3000;
  cfg.k = 3;
  cfg.replications = 50;
  const auto results = diagnose(cfg);
  int good = 0;
  std::ostringstream d;
  for (const auto& r : results) {
    const bool pass = r.fit.decaying() && r.fit.r_squared > 0.5;
    good += pass;
    d << " x=" << fmt("%.2f", r.curve.reference_x[0]) << " rho=" << fmt("%.4f", r.fit.rho)
      << " R2=" << fmt("%.3f", r.fit.r_squared) << (pass ? "" : " (miss)") << ";";
  }
  return {good >= 3, std::to_string(good) + "/4 points decaying with R2 > 0.5 (need 3):" +
                         d.str()};
}

Verdict quantile_oracle() {
  RngStream rng(606);
  const int alphas_pct[] = {5, 10, 20};
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(500);
    const int a = alphas_pct[trial % 3];
    std::vector<double> s(m);
    for (auto& v : s) v = rng.uniform() * 10.0;
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    // ceil((m + 1)(100 - a) / 100) in integers
    const std::size_t rank = ((m + 1) * static_cast<std::size_t>(100 - a) + 99) / 100;
    const double expect =
        rank > m ? std::numeric_limits<double>::infinity() : sorted[rank - 1];
    mismatches += conformal_quantile(s, a / 100.0) != expect;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 vectors"};
}

Verdict partition_dynamics(const Study& s) {
  std::size_t bad = 0;
  for (const auto& r : s.runs) {
    if (r.n_regions_pre < r.n_regions_post) ++bad;
    if (r.partition.total_members() != r.n_cal) ++bad;
  }
  const std::vector<LeafPath> paths{{0, 0}, {0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const auto pre = build_partition(paths, 2);
  std::vector<std::size_t> sizes;
  for (const auto& r : pre.regions()) sizes.push_back(r.members.size());
  std::sort(sizes.begin(), sizes.end());
  const bool example = sizes == std::vector<std::size_t>{1, 1, 1, 2};
  double pre_mean = 0.0;
  double post_mean = 0.0;
  for (const auto& r : s.runs) {
    pre_mean += static_cast<double>(r.n_regions_pre) / static_cast<double>(s.runs.size());
    post_mean += static_cast<double>(r.n_regions_post) / static_cast<double>(s.runs.size());
  }
  return {bad == 0 && example,
          std::to_string(bad) + " violating runs of " + std::to_string(s.runs.size()) +
              " (mean regions " + fmt("%.2f", pre_mean) + " -> " + fmt("%.2f", post_mean) +
              "); five-path example " + (example ? "{2,1,1,1}" : "WRONG")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict reduction_and_determinism() {
  const Dataset data = synth::sample({synth::Setting::kHeteroscedastic, 3000, 77});
  SplitSpec spec;
  spec.seed = 78;
  const DataSplit parts = split(data, spec, true);
  BoostConfig boost;
  boost.seed = 79;
  const BoostedEnsemble model = fit(parts.train, boost);
  const auto one = build_partition(model.leaf_paths(parts.cal), parts.cal.rows() + 1);
  const auto global = calibrate_global(model, parts.cal, 0.1);
  const auto local = calibrate_local(model, one, parts.cal, 0.1);
  const auto gi = predict_intervals(global, model, parts.test);
  const auto li = predict_intervals(local, model, parts.test);
  bool same = one.n_regions() == 1 && local.region_quantiles[0] == global.quantile;
  for (std::size_t i = 0; i < gi.size(); ++i) {
    same = same && gi[i].lower == li[i].lower && gi[i].upper == li[i].upper;
  }

  const fs::path base = fs::temp_directory_path() / "loboost_acceptance_determinism";
  fs::remove_all(base);
  ExperimentConfig cfg;
  cfg.command = Command::kSimulate;
  cfg.replications = 3;
  cfg.seed = 11;
  std::ostringstream log;
  cfg.out_dir = base / "a";
  const int ra = run_experiment(cfg, log);
  cfg.out_dir = base / "b";
  const int rb = run_experiment(cfg, log);
  const std::string a = slurp(base / "a" / "runs.csv");
  const std::string b = slurp(base / "b" / "runs.csv");
  const bool identical = ra == 0 && rb == 0 && !a.empty() && a == b;
  return {same && identical, std::string("one-region local == global: ") +
                                 (same ? "exact" : "DIFFERS") + "; runs.csv twice: " +
                                 (identical ? "byte-identical (" + std::to_string(a.size()) +
                                                  " bytes)"
                                            : "DIFFERENT")};
}

BoostConfig exact(int trees, double lr, int depth) {
  BoostConfig c;
  c.n_estimators = trees;
  c.learning_rate = lr;
  c.max_depth = depth;
  c.min_samples_leaf = 1;
  c.subsample = 1.0;
  c.validation_fraction = 0.0;
  c.n_iter_no_change = 0;
  return c;
}

Verdict gbm_correctness() {
  // additivity on random inputs
  const Dataset train = synth::sample({synth::Setting::kHeteroscedastic, 2000, 5});
  BoostConfig cfg;
  cfg.seed = 6;
  const BoostedEnsemble model = fit(train, cfg);
  RngStream rng(7);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{rng.uniform() * 4.0 - 2.0};
    double sum = model.base_value();
    for (std::size_t t = 1; t <= model.n_trees(); ++t) {
      sum += model.learning_rate() * model.tree_contribution(t, x);
    }
    worst = std::max(worst, std::abs(sum - model.predict(x)));
  }
  const bool additive = worst <= 1e-12;

  // monotone training MSE on a noiseless piecewise-constant target
  std::vector<double> gx;
  std::vector<double> gy;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      gx.push_back(i);
      gx.push_back(j);
      gy.push_back((i / 4) * 3.0 - (j / 4) * 2.0 + (i >= 8 && j >= 8 ? 5.0 : 0.0));
    }
  }
  const Dataset grid(gx, 2, gy);
  const BoostedEnsemble gm = fit(grid, exact(300, 0.3, 2));
  std::vector<double> pred(grid.rows(), gm.base_value());
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (std::size_t t = 1; t <= gm.n_trees(); ++t) {
    double mse_t = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i) {
      pred[i] += gm.learning_rate() * gm.tree_contribution(t, grid.row(i));
      mse_t += (gy[i] - pred[i]) * (gy[i] - pred[i]);
    }
    monotone = monotone && mse_t <= prev * (1.0 + 1e-12);
    prev = mse_t;
  }

  // stump examples
  const Dataset sd({0, 0, 1, 1}, 1, {0, 0, 2, 2});
  const auto s1 = fit(sd, exact(1, 1.0, 1));
  const auto s2 = fit(sd, exact(1, 0.5, 1));
  const auto s3 = fit(Dataset({0, 0, 1, 1}, 1, {3, 3, 3, 3}), exact(1, 1.0, 1));
  const std::vector<double> x0{0.0};
  const std::vector<double> x1{1.0};
  const bool stumps = s1.predict(sd) == std::vector<double>{0, 0, 2, 2} &&
                      s2.predict(sd) == std::vector<double>{0.5, 0.5, 1.5, 1.5} &&
                      s3.n_trees() == 0 && s3.predict(x0) == 3.0 && s1.predict(x0) == 0.0 &&
                      s1.tree_contribution(1, x0) == -1.0 && s1.tree_contribution(1, x1) == 1.0;

  return {additive && monotone && stumps,
          "additivity max error " + fmt("%.2e", worst) + " over 100 inputs; training MSE " +
              (monotone ? "non-increasing" : "INCREASED") + " over " +
              std::to_string(gm.n_trees()) + " trees; stump examples " +
              (stumps ? "exact" : "WRONG")};
}

Verdict relative_metric_formulas() {
  EvaluationReport ours;
  ours.smis = 13.83;
  ours.mse = 2.0;
  ours.calibration_seconds = 0.5;
  EvaluationReport best = ours;
  best.smis = 11.73;
  const auto rel = relative_metrics(ours, best);
  const auto self = relative_metrics(ours, ours);
  const bool eff = std::abs(rel.smis_efficiency_pct - 84.79) <= 0.05;
  const bool triple = self.smis_efficiency_pct == 100.0 && self.speedup == 1.0 &&
                      self.mse_improvement_pct == 0.0;
  return {eff && triple, "efficiency " + fmt("%.2f", rel.smis_efficiency_pct) +
                             "% (84.79 +/- 0.05); self-comparison (" +
                             fmt("%.2f", self.smis_efficiency_pct) + "%, " +
                             fmt("%.2f", self.speedup) + "x, " +
                             fmt("%.2f", self.mse_improvement_pct) + "%)"};
}

}  // namespace

int main() {
  std::cout << "running the 50-replication Setting 1 study..." << std::endl;
  const Study study = run_study();

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"marginal validity", [&] { return marginal_validity(study); }},
      {"local coverage sandwich", local_coverage_sandwich},
      {"conditional adaptivity", [&] { return conditional_adaptivity(study); }},
      {"interval quality", [&] { return interval_quality(study); }},
      {"decay diagnostic", decay_diagnostic},
      {"quantile oracle", quantile_oracle},
      {"partition dynamics", [&] { return partition_dynamics(study); }},
      {"reduction and determinism", reduction_and_determinism},
      {"gbm correctness", gbm_correctness},
      {"relative metrics", relative_metric_formulas},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << "  " << criteria[i].first
              << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
