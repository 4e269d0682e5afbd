#pragma once

#include "cpsc/core_data.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cpsc {

/// Overlap counts between two labelings of the same n points. Rows follow
/// the first labeling, columns the second; ids are compacted in order of
/// first appearance.
struct ContingencyTable {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> counts;  // row-major rows x cols
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;

  std::int64_t at(int r, int c) const {
    return counts[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
};

/// Throws std::invalid_argument when the lengths differ.
ContingencyTable contingency_table(std::span<const int> a, std::span<const int> b);

/// Adjusted Rand index. When the chance-corrected denominator vanishes the
/// result is 1.0 for identical partitions and 0.0 otherwise. Needs n >= 2.
double ari(std::span<const int> labels_true, std::span<const int> labels_pred);

/// Mutual information normalized by the geometric mean of the two entropies
/// (natural log). If either labeling has a single cluster the result is 0.0,
/// or 1.0 when both do.
double nmi(std::span<const int> labels_true, std::span<const int> labels_pred);

/// Fraction of points misplaced under the best one-to-one matching of
/// predicted clusters to true clusters.
double clustering_error(std::span<const int> labels_true, std::span<const int> labels_pred);

/// Mean silhouette width. Singleton clusters contribute s(i) = 0. Throws
/// std::invalid_argument for fewer than two non-empty clusters or n < 3.
double silhouette(const DistanceMatrix& dm, std::span<const int> labels);

/// Number of distinct ids in a labeling.
int count_clusters(std::span<const int> labels);

}  // namespace cpsc
