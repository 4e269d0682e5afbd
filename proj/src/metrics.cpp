#include "cpsc/metrics.hpp"

#include "cpsc/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cpsc {

namespace {

std::vector<int> compact(std::span<const int> labels, int& count) {
  std::unordered_map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  count = static_cast<int>(ids.size());
  return out;
}

void check_lengths(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("label vectors differ in length (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

__extension__ using Wide = __int128;

std::int64_t choose2(std::int64_t m) { return m * (m - 1) / 2; }

bool same_partition(const ContingencyTable& t) {
  if (t.rows != t.cols) return false;
  for (int r = 0; r < t.rows; ++r) {
    int nonzero = 0;
    for (int c = 0; c < t.cols; ++c) nonzero += t.at(r, c) > 0 ? 1 : 0;
    if (nonzero != 1) return false;
  }
  return true;
}

}  // namespace

ContingencyTable contingency_table(std::span<const int> a, std::span<const int> b) {
  check_lengths(a, b);
  ContingencyTable t;
  const std::vector<int> ca = compact(a, t.rows);
  const std::vector<int> cb = compact(b, t.cols);
  t.counts.assign(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols), 0);
  t.row_sums.assign(static_cast<std::size_t>(t.rows), 0);
  t.col_sums.assign(static_cast<std::size_t>(t.cols), 0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    ++t.counts[static_cast<std::size_t>(ca[i]) * static_cast<std::size_t>(t.cols) + static_cast<std::size_t>(cb[i])];
    ++t.row_sums[static_cast<std::size_t>(ca[i])];
    ++t.col_sums[static_cast<std::size_t>(cb[i])];
  }
  t.total = static_cast<std::int64_t>(ca.size());
  return t;
}

double ari(std::span<const int> labels_true, std::span<const int> labels_pred) {
  check_lengths(labels_true, labels_pred);
  if (labels_true.size() < 2) throw std::invalid_argument("ARI needs at least two points");
  const ContingencyTable t = contingency_table(labels_true, labels_pred);
  std::int64_t index = 0;
  for (std::int64_t c : t.counts) index += choose2(c);
  std::int64_t sum_rows = 0;
  for (std::int64_t c : t.row_sums) sum_rows += choose2(c);
  std::int64_t sum_cols = 0;
  for (std::int64_t c : t.col_sums) sum_cols += choose2(c);
  const std::int64_t pairs = choose2(t.total);
  // Scaled by 2 * C(n, 2) so numerator and denominator stay integral.
  const Wide numerator = 2 * (static_cast<Wide>(index) * pairs - static_cast<Wide>(sum_rows) * sum_cols);
  const Wide denominator = static_cast<Wide>(sum_rows + sum_cols) * pairs -
                               2 * static_cast<Wide>(sum_rows) * sum_cols;
  if (denominator == 0) return same_partition(t) ? 1.0 : 0.0;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

double nmi(std::span<const int> labels_true, std::span<const int> labels_pred) {
  check_lengths(labels_true, labels_pred);
  if (labels_true.empty()) throw std::invalid_argument("NMI needs at least one point");
  const ContingencyTable t = contingency_table(labels_true, labels_pred);
  if (t.rows == 1 || t.cols == 1) return (t.rows == 1 && t.cols == 1) ? 1.0 : 0.0;
  const double n = static_cast<double>(t.total);
  double mutual = 0.0;
  for (int r = 0; r < t.rows; ++r) {
    for (int c = 0; c < t.cols; ++c) {
      const double v = static_cast<double>(t.at(r, c));
      if (v == 0.0) continue;
      mutual += v * std::log(n * v / (static_cast<double>(t.row_sums[static_cast<std::size_t>(r)]) *
                                      static_cast<double>(t.col_sums[static_cast<std::size_t>(c)])));
    }
  }
  auto entropy = [n](const std::vector<std::int64_t>& sums) {
    double h = 0.0;
    for (std::int64_t s : sums) {
      const double v = static_cast<double>(s);
      h += v * std::log(v / n);
    }
    return h;
  };
  const double result = mutual / std::sqrt(entropy(t.row_sums) * entropy(t.col_sums));
  return std::clamp(result, 0.0, 1.0);
}

double clustering_error(std::span<const int> labels_true, std::span<const int> labels_pred) {
  check_lengths(labels_true, labels_pred);
  if (labels_true.empty()) throw std::invalid_argument("clustering error needs at least one point");
  const ContingencyTable t = contingency_table(labels_true, labels_pred);
  const std::vector<int> match = max_weight_assignment(t.counts, t.rows, t.cols);
  std::int64_t matched = 0;
  for (int r = 0; r < t.rows; ++r) {
    const int c = match[static_cast<std::size_t>(r)];
    if (c >= 0) matched += t.at(r, c);
  }
  return static_cast<double>(t.total - matched) / static_cast<double>(t.total);
}

int count_clusters(std::span<const int> labels) {
  int count = 0;
  compact(labels, count);
  return count;
}

double silhouette(const DistanceMatrix& dm, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (dm.size() != n) throw std::invalid_argument("distance matrix and labels differ in size");
  if (n < 3) throw std::invalid_argument("silhouette needs at least three points");
  int k = 0;
  const std::vector<int> ids = compact(labels, k);
  if (k < 2) throw std::invalid_argument("silhouette is undefined for fewer than two clusters");

  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int id : ids) ++sizes[static_cast<std::size_t>(id)];

  std::vector<double> sums(static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(ids[j])] += dm(i, j);
    }
    const auto own = static_cast<std::size_t>(ids[i]);
    if (sizes[own] == 1) continue;
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace cpsc
