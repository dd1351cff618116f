#include "loboost/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "loboost/errors.hpp"
#include "loboost/rng.hpp"

namespace loboost {

Dataset::Dataset(std::vector<double> features, std::size_t n_features,
                 std::vector<double> targets,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)),
      n_features_(n_features),
      targets_(std::move(targets)),
      feature_names_(std::move(feature_names)) {
  if (n_features_ == 0) throw DimensionError("dataset needs at least one feature");
  if (features_.size() != targets_.size() * n_features_) {
    throw DimensionError("feature matrix has " + std::to_string(features_.size()) +
                         " cells, expected " +
                         std::to_string(targets_.size() * n_features_));
  }
  if (!feature_names_.empty() && feature_names_.size() != n_features_) {
    throw DimensionError("feature_names length does not match column count");
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw ParseError("non-finite feature value");
  }
  for (double v : targets_) {
    if (!std::isfinite(v)) throw ParseError("non-finite target value");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(indices.size() * n_features_);
  y.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows()) throw IndexError("row " + std::to_string(i) + " out of range");
    auto r = row(i);
    x.insert(x.end(), r.begin(), r.end());
    y.push_back(targets_[i]);
  }
  return Dataset(std::move(x), n_features_, std::move(y), feature_names_);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  // strtod accepts "nan"/"inf"; those rows are dropped later, not rejected.
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 CsvLoadInfo* info) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw SchemaError(path.string() + ": missing header row");
  }
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::size_t target = header.size() - 1;
  if (!target_column.empty()) {
    auto it = std::find(header.begin(), header.end(), target_column);
    if (it == header.end()) {
      throw SchemaError("target column '" + target_column + "' not in header");
    }
    target = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() < 2) throw SchemaError("need at least one feature column and a target");

  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != target) names.push_back(header[j]);
  }

  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> row_values(header.size());
  CsvLoadInfo stats;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    }
    ++stats.rows_read;
    bool finite = true;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_number(cells[j], row_values[j])) {
        throw ParseError("row " + std::to_string(line_no) + ", column '" + header[j] +
                         "': cannot parse '" + cells[j] + "'");
      }
      finite = finite && std::isfinite(row_values[j]);
    }
    if (!finite) {
      ++stats.rows_dropped;
      continue;
    }
    for (std::size_t j = 0; j < row_values.size(); ++j) {
      if (j == target) {
        y.push_back(row_values[j]);
      } else {
        x.push_back(row_values[j]);
      }
    }
  }
  if (stats.rows_dropped > 0) {
    std::clog << "load_csv: dropped " << stats.rows_dropped
              << " row(s) with non-finite values from " << path.string() << '\n';
  }
  if (info) *info = stats;
  if (y.empty()) throw SchemaError(path.string() + ": no data rows");
  const std::size_t n_features = names.size();
  return Dataset(std::move(x), n_features, std::move(y), std::move(names));
}

void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    out << (data.feature_names().empty() ? "x" + std::to_string(j)
                                         : data.feature_names()[j])
        << ',';
  }
  out << target_name << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.target(i) << '\n';
  }
}

void SplitSpec::validate() const {
  auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_open_unit(train_frac) || !in_open_unit(cal_frac) || !in_open_unit(test_frac)) {
    throw ConfigError("split fractions must lie in (0, 1)");
  }
  if (std::abs(train_frac + cal_frac + test_frac - 1.0) > 1e-12) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (!(native_cal_transfer >= 0.0 && native_cal_transfer < 1.0)) {
    throw ConfigError("native_cal_transfer must lie in [0, 1)");
  }
}

namespace {
// floor() that tolerates products like 0.3 * 40 landing a few ulps low.
std::size_t floor_count(double v) {
  return static_cast<std::size_t>(std::floor(v + 1e-9));
}
}  // namespace

void split_indices(std::size_t n, const SplitSpec& spec, bool native,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& cal,
                   std::vector<std::size_t>& test) {
  spec.validate();
  if (n < 10) throw ConfigError("split needs at least 10 rows, got " + std::to_string(n));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng = RngStream(spec.seed).derive("split");
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  }

  const std::size_t n_test = floor_count(static_cast<double>(n) * spec.test_frac);
  const std::size_t n_cal = floor_count(static_cast<double>(n) * spec.cal_frac);
  const std::size_t n_train = n - n_test - n_cal;
  const std::size_t moved =
      native ? floor_count(spec.native_cal_transfer * static_cast<double>(n_cal)) : 0;

  train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  auto cal_begin = perm.begin() + static_cast<std::ptrdiff_t>(n_train);
  auto cal_end = cal_begin + static_cast<std::ptrdiff_t>(n_cal);
  train.insert(train.end(), cal_begin, cal_begin + static_cast<std::ptrdiff_t>(moved));
  cal.assign(cal_begin + static_cast<std::ptrdiff_t>(moved), cal_end);
  test.assign(cal_end, perm.end());
}

DataSplit split(const Dataset& data, const SplitSpec& spec, bool native) {
  DataSplit out;
  split_indices(data.rows(), spec, native, out.train_indices, out.cal_indices,
                out.test_indices);
  out.train = data.subset(out.train_indices);
  out.cal = data.subset(out.cal_indices);
  out.test = data.subset(out.test_indices);
  return out;
}

}  // namespace loboost
