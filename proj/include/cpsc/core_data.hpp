#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpsc {

/// n x d matrix, one point per row, rows contiguous in memory.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Euclidean distance between two equally sized coordinate vectors.
///
/// Every distance in the library goes through this function so that values
/// computed from raw points and values read from a DistanceMatrix are
/// bit-identical (conformal ranks compare scores with exact equality).
double euclidean_distance(std::span<const double> a, std::span<const double> b);

inline std::span<const double> row_span(const PointMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Points with optional ground-truth labels and feature names.
///
/// Invariants (checked by validate()): n >= 1, d >= 1, all entries finite,
/// labels (if any) have length n and are non-negative.
struct Dataset {
  PointMatrix points;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> names;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(points.cols()); }
  std::span<const double> point(std::size_t i) const {
    return row_span(points, static_cast<Eigen::Index>(i));
  }

  /// Throws DataError when an invariant is violated.
  void validate() const;
};

/// Symmetric n x n Euclidean distances with a zero diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd dist;
  double max_dist = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(dist.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// Reads a comma-separated file.
///
/// A header row is assumed iff the first row has a non-numeric cell outside
/// the label column. `label_column` selects the ground-truth column either by
/// header name or by 0-based index (negative indices count from the end, so
/// "-1" is the trailing column). Label values are mapped to dense ids
/// 0..c-1 in order of first appearance. Errors carry 1-based row/column
/// locations and are thrown as DataError.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);
Dataset parse_csv(std::istream& in,
                  const std::optional<std::string>& label_column = std::nullopt,
                  const std::string& source_name = "<stream>");

/// Writes features (and a trailing "label" column when labels are present).
/// Values are printed with 17 significant digits so that a reload is exact.
void save_csv(const Dataset& data, const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);

/// Rescales every column to [0, 1]; constant columns become all zeros.
Dataset normalize_minmax(const Dataset& data);

/// Centers every column and divides by its population standard deviation;
/// constant columns become all zeros.
Dataset normalize_zscore(const Dataset& data);

DistanceMatrix pairwise_distances(const Dataset& data);

}  // namespace cpsc
