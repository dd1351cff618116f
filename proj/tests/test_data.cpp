#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "doctest.h"
#include "loboost/data.hpp"
#include "loboost/errors.hpp"

namespace fs = std::filesystem;
using loboost::Dataset;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("loboost_test_data_" + name);
  std::ofstream(p) << text;
  return p;
}

Dataset ramp(std::size_t n) {
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i);
    y[i] = 10.0 * static_cast<double>(i);
  }
  return Dataset(x, 1, y);
}

}  // namespace

TEST_CASE("dataset shape checks") {
  CHECK_THROWS_AS(Dataset({1, 2, 3}, 2, {1, 2}), loboost::DimensionError);
  CHECK_THROWS_AS(Dataset({}, 0, {}), loboost::DimensionError);
  CHECK_THROWS_AS(Dataset({1, 2}, 1, {1, 2}, {"a", "b"}), loboost::DimensionError);
  CHECK_THROWS_AS(Dataset({1, NAN}, 1, {1, 2}), loboost::ParseError);

  Dataset d({1, 2, 3, 4, 5, 6}, 2, {7, 8, 9}, {"a", "b"});
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 2);
  CHECK(d.feature(1, 0) == 3);
  CHECK(d.row(2)[1] == 6);
  const std::vector<std::size_t> pick{2, 0};
  const Dataset s = d.subset(pick);
  CHECK(s.rows() == 2);
  CHECK(s.target(0) == 9);
  CHECK(s.feature(1, 1) == 2);
  const std::vector<std::size_t> bad{3};
  CHECK_THROWS_AS(d.subset(bad), loboost::IndexError);
}

TEST_CASE("load_csv reads the header and chooses the target") {
  const auto p = write_temp("basic.csv", "a, b ,y\n1,2,3\n4,5,6\n\n");
  const Dataset d = loboost::load_csv(p);
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 2);
  CHECK(d.feature_names() == std::vector<std::string>{"a", "b"});
  CHECK(d.target(1) == 6);

  const Dataset e = loboost::load_csv(p, "a");
  CHECK(e.feature_names() == std::vector<std::string>{"b", "y"});
  CHECK(e.target(0) == 1);
  CHECK(e.feature(0, 1) == 3);
  CHECK_THROWS_AS(loboost::load_csv(p, "zzz"), loboost::SchemaError);
}

TEST_CASE("load_csv drops non-finite rows and counts them") {
  const auto p = write_temp("nan.csv", "x,y\n1,2\nnan,3\n4,inf\n5,6\n");
  loboost::CsvLoadInfo info;
  const Dataset d = loboost::load_csv(p, "", &info);
  CHECK(d.rows() == 2);
  CHECK(info.rows_read == 4);
  CHECK(info.rows_dropped == 2);
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_AS(loboost::load_csv("/nonexistent/loboost.csv"), loboost::IoError);
  CHECK_THROWS_AS(loboost::load_csv(write_temp("empty.csv", "")), loboost::SchemaError);
  CHECK_THROWS_AS(loboost::load_csv(write_temp("onecol.csv", "y\n1\n")), loboost::SchemaError);
  CHECK_THROWS_AS(loboost::load_csv(write_temp("norows.csv", "x,y\n")), loboost::SchemaError);
  CHECK_THROWS_AS(loboost::load_csv(write_temp("ragged.csv", "x,y\n1,2\n3\n")),
                  loboost::ParseError);
  try {
    loboost::load_csv(write_temp("text.csv", "x,y\n1,2\nabc,3\n"));
    FAIL("expected ParseError");
  } catch (const loboost::ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("'x'") != std::string::npos);
  }
}

TEST_CASE("write_csv round trip is exact") {
  Dataset d({0.1, 1.0 / 3.0, -2.5e-300, 7}, 2, {std::acos(-1.0), 1e17}, {"u", "v"});
  const auto p = fs::temp_directory_path() / "loboost_test_data_roundtrip.csv";
  loboost::write_csv(p, d, "target");
  const Dataset back = loboost::load_csv(p, "target");
  CHECK(back.feature_names() == d.feature_names());
  CHECK(std::equal(back.features().begin(), back.features().end(), d.features().begin()));
  CHECK(std::equal(back.targets().begin(), back.targets().end(), d.targets().begin()));
}

TEST_CASE("the demo file loads") {
  const Dataset d = loboost::load_csv(fs::path(LOBOOST_TEST_DATA_DIR) / "demo.csv");
  CHECK(d.rows() == 200);
  CHECK(d.cols() == 1);
}

TEST_CASE("split sizes for 100 rows") {
  loboost::SplitSpec spec;
  spec.seed = 9;
  std::vector<std::size_t> tr, ca, te;
  loboost::split_indices(100, spec, false, tr, ca, te);
  CHECK(tr.size() == 40);
  CHECK(ca.size() == 40);
  CHECK(te.size() == 20);

  std::vector<std::size_t> tr2, ca2, te2;
  loboost::split_indices(100, spec, true, tr2, ca2, te2);
  CHECK(tr2.size() == 52);
  CHECK(ca2.size() == 28);
  CHECK(te2.size() == 20);
  // native moves the first calibration rows; the test set is unchanged
  CHECK(te2 == te);
  CHECK(std::equal(tr.begin(), tr.end(), tr2.begin()));
  CHECK(std::equal(ca.begin(), ca.begin() + 12, tr2.begin() + 40));
  CHECK(std::equal(ca.begin() + 12, ca.end(), ca2.begin()));
}

TEST_CASE("split is a seeded permutation") {
  loboost::SplitSpec spec;
  spec.seed = 3;
  std::vector<std::size_t> tr, ca, te;
  loboost::split_indices(257, spec, true, tr, ca, te);
  std::vector<std::size_t> all = tr;
  all.insert(all.end(), ca.begin(), ca.end());
  all.insert(all.end(), te.begin(), te.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(257);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  CHECK(all == expect);

  std::vector<std::size_t> tr2, ca2, te2;
  loboost::split_indices(257, spec, true, tr2, ca2, te2);
  CHECK(tr == tr2);
  CHECK(ca == ca2);
  CHECK(te == te2);

  spec.seed = 4;
  loboost::split_indices(257, spec, true, tr2, ca2, te2);
  CHECK(te != te2);
}

TEST_CASE("split carries rows along with indices") {
  const Dataset d = ramp(50);
  loboost::SplitSpec spec;
  const auto s = loboost::split(d, spec, true);
  CHECK(s.train.rows() + s.cal.rows() + s.test.rows() == 50);
  for (std::size_t i = 0; i < s.cal.rows(); ++i) {
    CHECK(s.cal.feature(i, 0) == static_cast<double>(s.cal_indices[i]));
    CHECK(s.cal.target(i) == 10.0 * static_cast<double>(s.cal_indices[i]));
  }
}

TEST_CASE("split configuration errors") {
  std::vector<std::size_t> a, b, c;
  loboost::SplitSpec spec;
  CHECK_THROWS_AS(loboost::split_indices(9, spec, false, a, b, c), loboost::ConfigError);
  spec.train_frac = 0.5;
  CHECK_THROWS_AS(loboost::split_indices(100, spec, false, a, b, c), loboost::ConfigError);
  spec = {};
  spec.native_cal_transfer = 1.0;
  CHECK_THROWS_AS(spec.validate(), loboost::ConfigError);
  spec = {};
  spec.test_frac = 0.0;
  CHECK_THROWS_AS(spec.validate(), loboost::ConfigError);
}
