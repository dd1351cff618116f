#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace loboost {

/// Dense regression dataset: row-major features plus one target per row.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DimensionError on shape mismatch and ParseError on non-finite
  /// values.
  Dataset(std::vector<double> features, std::size_t n_features,
          std::vector<double> targets,
          std::vector<std::string> feature_names = {});

  std::size_t rows() const { return targets_.size(); }
  std::size_t cols() const { return n_features_; }
  bool empty() const { return targets_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * n_features_, n_features_};
  }
  double feature(std::size_t i, std::size_t j) const {
    return features_[i * n_features_ + j];
  }
  double target(std::size_t i) const { return targets_[i]; }

  std::span<const double> features() const { return features_; }
  std::span<const double> targets() const { return targets_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Copy of the given rows, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<double> features_;
  std::size_t n_features_ = 0;
  std::vector<double> targets_;
  std::vector<std::string> feature_names_;
};

struct CsvLoadInfo {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;  // rows with NaN or infinite cells
};

/// Reads a headered CSV. An empty target_column selects the last column.
Dataset load_csv(const std::filesystem::path& path,
                 const std::string& target_column = {},
                 CsvLoadInfo* info = nullptr);

/// Writes features then the target under `target_name`.
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::string& target_name = "y");

struct SplitSpec {
  double train_frac = 0.4;
  double cal_frac = 0.4;
  double test_frac = 0.2;
  double native_cal_transfer = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DataSplit {
  Dataset train;
  Dataset cal;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> cal_indices;
  std::vector<std::size_t> test_indices;
};

/// Index-only part of split(); a pure function of (n, spec, native).
void split_indices(std::size_t n, const SplitSpec& spec, bool native,
                   std::vector<std::size_t>& train,
                   std::vector<std::size_t>& cal,
                   std::vector<std::size_t>& test);

/// Seeded shuffle, then test = floor(n * test_frac), cal = floor(n * cal_frac)
/// and the remainder goes to train. With `native`, the first
/// floor(native_cal_transfer * |cal|) calibration rows move to train.
DataSplit split(const Dataset& data, const SplitSpec& spec, bool native);

}  // namespace loboost
