#include "cpsc/core_data.hpp"
#include "cpsc/error.hpp"
#include "cpsc/random.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace cpsc;

namespace {

Dataset parse(const std::string& text, std::optional<std::string> label = std::nullopt) {
  std::istringstream in(text);
  return parse_csv(in, label, "test.csv");
}

std::string error_of(const std::string& text, std::optional<std::string> label = std::nullopt) {
  try {
    parse(text, label);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

Dataset from_rows(const std::vector<std::vector<double>>& rows) {
  Dataset d;
  d.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      d.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

}  // namespace

TEST_CASE("load_csv: plain numeric file without labels") {
  const Dataset d = parse("1,2\n3,4\n5,6\n");
  CHECK(d.size() == 3);
  CHECK(d.dims() == 2);
  CHECK_FALSE(d.labels.has_value());
  CHECK(d.points(2, 1) == 6.0);
  CHECK(d.names.empty());
}

TEST_CASE("load_csv: named label column maps to first-appearance ids") {
  const Dataset d = parse("x,y,class\n0,1,a\n2,3,b\n4,5,a\n", "class");
  REQUIRE(d.labels.has_value());
  CHECK(*d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.dims() == 2);
  CHECK(d.names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("load_csv: label column by index, including negative from the end") {
  const Dataset a = parse("0.5,7,1.5\n0.25,3,2.5\n", "1");
  CHECK(*a.labels == std::vector<int>{0, 1});
  CHECK(a.points(1, 1) == 2.5);
  const Dataset b = parse("x,y,label\n0,1,2\n2,3,2\n4,5,0\n", "-1");
  CHECK(*b.labels == std::vector<int>{0, 0, 1});
  CHECK(b.size() == 3);
}

TEST_CASE("load_csv: errors carry row and column") {
  const std::string bad_cell = error_of("1,2\n3,abc\n");
  CHECK(bad_cell.find("row 2") != std::string::npos);
  CHECK(bad_cell.find("column 2") != std::string::npos);

  const std::string ragged = error_of("1,2\n3\n");
  CHECK(ragged.find("row 2") != std::string::npos);

  CHECK(error_of("a,b\n1,2\n", "class").find("'class' not found") != std::string::npos);
  CHECK(error_of("1,2\n", "5").find("out of range") != std::string::npos);
  CHECK(error_of("1,nan\n").find("non-finite") != std::string::npos);
  CHECK_FALSE(error_of("").empty());
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("load_csv: blank lines, whitespace and quotes are tolerated") {
  const Dataset d = parse("\"x\", \"y\"\n 1 , +2 \n\n3,4e0\n");
  CHECK(d.size() == 2);
  CHECK(d.points(0, 1) == 2.0);
  CHECK(d.names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("normalize_minmax examples") {
  const Dataset d = normalize_minmax(from_rows({{0, 7, 0}, {5, 7, 1}, {10, 7, 1}}));
  CHECK(d.points(0, 0) == 0.0);
  CHECK(d.points(1, 0) == 0.5);
  CHECK(d.points(2, 0) == 1.0);
  for (int i = 0; i < 3; ++i) CHECK(d.points(i, 1) == 0.0);
  CHECK(d.points(0, 2) == 0.0);
  CHECK(d.points(2, 2) == 1.0);
}

TEST_CASE("normalize_minmax: range and idempotence property") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d;
    d.points.resize(15, 3);
    for (Eigen::Index i = 0; i < 15; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) d.points(i, j) = 100.0 * rng.normal();
    d.labels = std::vector<int>(15, 0);
    const Dataset once = normalize_minmax(d);
    CHECK(once.labels == d.labels);
    for (Eigen::Index i = 0; i < 15; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(once.points(i, j) >= 0.0);
        CHECK(once.points(i, j) <= 1.0);
      }
    const Dataset twice = normalize_minmax(once);
    CHECK((twice.points - once.points).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("normalize_zscore centres and scales") {
  const Dataset d = normalize_zscore(from_rows({{1, 5}, {3, 5}}));
  CHECK(d.points(0, 0) == doctest::Approx(-1.0));
  CHECK(d.points(1, 0) == doctest::Approx(1.0));
  CHECK(d.points(0, 1) == 0.0);
}

TEST_CASE("pairwise_distances examples and metric properties") {
  const DistanceMatrix a = pairwise_distances(from_rows({{0, 0}, {3, 4}, {3, 4}}));
  CHECK(a(0, 1) == 5.0);
  CHECK(a(1, 2) == 0.0);
  CHECK(a.max_dist == 5.0);
  CHECK(pairwise_distances(from_rows({{1, 1}})).max_dist == 0.0);

  Rng rng(11);
  Dataset d;
  d.points.resize(25, 4);
  for (Eigen::Index i = 0; i < 25; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) d.points(i, j) = rng.normal();
  const DistanceMatrix dm = pairwise_distances(d);
  double max_off = 0.0;
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(dm(i, i) == 0.0);
    for (std::size_t j = 0; j < 25; ++j) {
      CHECK(dm(i, j) == dm(j, i));
      CHECK(dm(i, j) >= 0.0);
      CHECK(dm(i, j) == euclidean_distance(d.point(i), d.point(j)));
      if (i != j) max_off = std::max(max_off, dm(i, j));
      for (std::size_t k = 0; k < 25; ++k) CHECK(dm(i, k) <= dm(i, j) + dm(j, k) + 1e-9);
    }
  }
  CHECK(dm.max_dist == max_off);
}

TEST_CASE("save and reload round-trips features and labels") {
  Rng rng(3);
  Dataset d;
  d.points.resize(10, 3);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) d.points(i, j) = rng.normal() * 1e3;
  d.labels = std::vector<int>{0, 0, 1, 1, 2, 2, 0, 1, 2, 0};
  d.names = {"a", "b", "c"};
  const auto path = std::filesystem::temp_directory_path() / "cpsc_roundtrip.csv";
  save_csv(d, path);
  const Dataset back = load_csv(path, "label");
  std::filesystem::remove(path);
  CHECK((back.points - d.points).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.labels == d.labels);
  CHECK(back.names == d.names);
}

TEST_CASE("Dataset::validate rejects broken invariants") {
  Dataset d = from_rows({{1, 2}});
  d.labels = std::vector<int>{0, 1};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.labels = std::vector<int>{-1};
  CHECK_THROWS_AS(d.validate(), DataError);
  d.labels.reset();
  d.points(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(d.validate(), DataError);
}
