#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "loboost/conformal.hpp"
#include "loboost/errors.hpp"
#include "loboost/gbm.hpp"
#include "loboost/metrics.hpp"
#include "loboost/partition.hpp"
#include "loboost/synth.hpp"

namespace py = pybind11;
using namespace loboost;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts a 2-D array, or a 1-D array treated as a single feature column.
Dataset to_dataset(const Matrix& x, const std::vector<double>& y) {
  if (x.ndim() != 1 && x.ndim() != 2) throw DimensionError("x must be 1-D or 2-D");
  const std::size_t rows = static_cast<std::size_t>(x.shape(0));
  const std::size_t cols = x.ndim() == 2 ? static_cast<std::size_t>(x.shape(1)) : 1;
  std::vector<double> flat(x.data(), x.data() + rows * cols);
  return Dataset(std::move(flat), cols, y);
}

Dataset features_only(const Matrix& x) {
  const std::size_t rows = x.ndim() == 0 ? 0 : static_cast<std::size_t>(x.shape(0));
  return to_dataset(x, std::vector<double>(rows, 0.0));
}

py::array_t<double> as_array(const std::vector<PredictionInterval>& ivs) {
  py::array_t<double> out({static_cast<py::ssize_t>(ivs.size()), py::ssize_t{2}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    view(i, 0) = ivs[i].lower;
    view(i, 1) = ivs[i].upper;
  }
  return out;
}

std::vector<PredictionInterval> from_array(const Matrix& a, const std::vector<double>& center) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw DimensionError("intervals must have shape (n, 2)");
  std::vector<PredictionInterval> out(static_cast<std::size_t>(a.shape(0)));
  auto view = a.unchecked<2>();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].lower = view(i, 0);
    out[i].upper = view(i, 1);
    out[i].center = center.empty() ? 0.5 * (out[i].lower + out[i].upper) : center[i];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_loboost, m) {
  m.doc() = "Local conformal prediction intervals on boosted-tree partitions";

  py::register_exception<Error>(m, "LoboostError", PyExc_ValueError);

  py::class_<BoostConfig>(m, "BoostConfig")
      .def(py::init<>())
      .def_readwrite("n_estimators", &BoostConfig::n_estimators)
      .def_readwrite("learning_rate", &BoostConfig::learning_rate)
      .def_readwrite("max_depth", &BoostConfig::max_depth)
      .def_readwrite("min_samples_leaf", &BoostConfig::min_samples_leaf)
      .def_readwrite("subsample", &BoostConfig::subsample)
      .def_readwrite("validation_fraction", &BoostConfig::validation_fraction)
      .def_readwrite("n_iter_no_change", &BoostConfig::n_iter_no_change)
      .def_readwrite("seed", &BoostConfig::seed);

  py::class_<BoostedEnsemble>(m, "Ensemble")
      .def_property_readonly("n_trees", &BoostedEnsemble::n_trees)
      .def_property_readonly("base_value", &BoostedEnsemble::base_value)
      .def_property_readonly("learning_rate", &BoostedEnsemble::learning_rate)
      .def("predict",
           [](const BoostedEnsemble& e, const Matrix& x) {
             return e.predict(features_only(x));
           })
      .def("leaf_paths",
           [](const BoostedEnsemble& e, const Matrix& x) {
             return e.leaf_paths(features_only(x));
           })
      .def("save",
           [](const BoostedEnsemble& e) {
             std::ostringstream out;
             e.save(out);
             return out.str();
           })
      .def_static("load", [](const std::string& text) {
        std::istringstream in(text);
        return BoostedEnsemble::load(in);
      });

  py::class_<PartitionModel>(m, "Partition")
      .def_property_readonly("n_regions", &PartitionModel::n_regions)
      .def_property_readonly("n_regions_pre_merge", &PartitionModel::n_regions_pre_merge)
      .def_property_readonly("total_members", &PartitionModel::total_members)
      .def("region_sizes",
           [](const PartitionModel& p) {
             std::vector<std::size_t> sizes;
             for (const auto& r : p.regions()) sizes.push_back(r.members.size());
             return sizes;
           })
      .def("locate",
           [](const PartitionModel& p, const std::vector<int>& path) { return locate(p, path); })
      .def("dump", &PartitionModel::dump);

  py::class_<GlobalCalibrator>(m, "GlobalCalibrator")
      .def_readonly("quantile", &GlobalCalibrator::quantile)
      .def_readonly("alpha", &GlobalCalibrator::alpha)
      .def_readonly("n_cal", &GlobalCalibrator::n_cal);

  py::class_<LocalCalibrator>(m, "LocalCalibrator")
      .def_readonly("region_quantiles", &LocalCalibrator::region_quantiles)
      .def_readonly("region_counts", &LocalCalibrator::region_counts)
      .def_readonly("alpha", &LocalCalibrator::alpha)
      .def_readonly("partition", &LocalCalibrator::partition);

  m.def(
      "sample",
      [](int setting, std::size_t n, std::uint64_t seed) {
        const Dataset d = synth::sample({static_cast<synth::Setting>(setting), n, seed});
        const auto f = d.features();
        const auto t = d.targets();
        return py::make_tuple(py::array_t<double>(static_cast<py::ssize_t>(f.size()), f.data())
                                  .reshape({static_cast<py::ssize_t>(d.rows()),
                                            static_cast<py::ssize_t>(d.cols())}),
                              py::array_t<double>(static_cast<py::ssize_t>(t.size()), t.data()));
      },
      py::arg("setting"), py::arg("n"), py::arg("seed") = 0,
      "Draw (x, y) from synthetic setting 1 or 2.");

  m.def(
      "oracle_interval",
      [](int setting, double x, double alpha) {
        const auto iv = synth::oracle_interval(static_cast<synth::Setting>(setting), x, alpha);
        return std::make_pair(iv.lower, iv.upper);
      },
      py::arg("setting"), py::arg("x"), py::arg("alpha") = 0.1);

  m.def(
      "fit",
      [](const Matrix& x, const std::vector<double>& y, const BoostConfig& config) {
        return fit(to_dataset(x, y), config);
      },
      py::arg("x"), py::arg("y"), py::arg("config") = BoostConfig{});

  m.def("conformal_rank", &conformal_rank, py::arg("m"), py::arg("alpha"));
  m.def(
      "conformal_quantile",
      [](const std::vector<double>& s, double alpha) { return conformal_quantile(s, alpha); },
      py::arg("scores"), py::arg("alpha"));

  m.def(
      "build_partition",
      [](const std::vector<LeafPath>& paths, std::size_t n_part) {
        return build_partition(paths, n_part);
      },
      py::arg("paths"), py::arg("n_part"));
  m.def(
      "merge_regions",
      [](const PartitionModel& p, std::size_t n_merge, const std::vector<double>& w) {
        return merge_regions(p, n_merge, w);
      },
      py::arg("partition"), py::arg("n_merge"), py::arg("weights"));
  m.def(
      "tree_weights",
      [](const BoostedEnsemble& e, const Matrix& x, const std::string& scheme) {
        return compute_tree_weights(e, features_only(x), WeightScheme::parse(scheme));
      },
      py::arg("model"), py::arg("x"), py::arg("scheme") = "variance");

  m.def(
      "calibrate_global",
      [](const BoostedEnsemble& e, const Matrix& x, const std::vector<double>& y, double alpha) {
        return calibrate_global(e, to_dataset(x, y), alpha);
      },
      py::arg("model"), py::arg("x"), py::arg("y"), py::arg("alpha") = 0.1);
  m.def(
      "calibrate_local",
      [](const BoostedEnsemble& e, const PartitionModel& p, const Matrix& x,
         const std::vector<double>& y, double alpha, bool routed) {
        const Dataset cal = to_dataset(x, y);
        return routed ? calibrate_local_routed(e, p, cal, alpha)
                      : calibrate_local(e, p, cal, alpha);
      },
      py::arg("model"), py::arg("partition"), py::arg("x"), py::arg("y"),
      py::arg("alpha") = 0.1, py::arg("routed") = false);

  m.def(
      "intervals",
      [](const GlobalCalibrator& c, const BoostedEnsemble& e, const Matrix& x) {
        return as_array(predict_intervals(c, e, features_only(x)));
      },
      py::arg("calibrator"), py::arg("model"), py::arg("x"));
  m.def(
      "intervals",
      [](const LocalCalibrator& c, const BoostedEnsemble& e, const Matrix& x) {
        return as_array(predict_intervals(c, e, features_only(x)));
      },
      py::arg("calibrator"), py::arg("model"), py::arg("x"),
      "Interval bounds as an (n, 2) array of [lower, upper].");

  m.def(
      "amc",
      [](const Matrix& ivs, const std::vector<double>& y) { return amc(from_array(ivs, {}), y); },
      py::arg("intervals"), py::arg("y"));
  m.def(
      "smis",
      [](const Matrix& ivs, const std::vector<double>& y, double alpha) {
        return smis(from_array(ivs, {}), y, alpha);
      },
      py::arg("intervals"), py::arg("y"), py::arg("alpha") = 0.1);
  m.def(
      "mse",
      [](const std::vector<double>& pred, const std::vector<double>& y) { return mse(pred, y); },
      py::arg("predictions"), py::arg("y"));
}
