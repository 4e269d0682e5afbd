#include "cpsc/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cpsc {

std::vector<int> max_weight_assignment(const std::vector<std::int64_t>& weights, int rows, int cols) {
  if (rows < 0 || cols < 0 || weights.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("weight matrix shape mismatch");
  }
  const int n = std::max(rows, cols);
  if (n == 0) return {};
  std::int64_t top = 0;
  for (std::int64_t w : weights) top = std::max(top, w);
  auto cost = [&](int r, int c) -> std::int64_t {
    const std::int64_t w = (r < rows && c < cols) ? weights[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] : 0;
    return top - w;
  };

  // Shortest augmenting path Hungarian method with 1-based potentials.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(static_cast<std::size_t>(n) + 1, 0), v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int r = 1; r <= n; ++r) {
    match[0] = r;
    int col0 = 0;
    std::vector<std::int64_t> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(col0)] = 1;
      const int r0 = match[static_cast<std::size_t>(col0)];
      std::int64_t delta = kInf;
      int col1 = 0;
      for (int c = 1; c <= n; ++c) {
        if (used[static_cast<std::size_t>(c)]) continue;
        const std::int64_t cur = cost(r0 - 1, c - 1) - u[static_cast<std::size_t>(r0)] - v[static_cast<std::size_t>(c)];
        if (cur < minv[static_cast<std::size_t>(c)]) {
          minv[static_cast<std::size_t>(c)] = cur;
          way[static_cast<std::size_t>(c)] = col0;
        }
        if (minv[static_cast<std::size_t>(c)] < delta) {
          delta = minv[static_cast<std::size_t>(c)];
          col1 = c;
        }
      }
      for (int c = 0; c <= n; ++c) {
        if (used[static_cast<std::size_t>(c)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(c)])] += delta;
          v[static_cast<std::size_t>(c)] -= delta;
        } else {
          minv[static_cast<std::size_t>(c)] -= delta;
        }
      }
      col0 = col1;
    } while (match[static_cast<std::size_t>(col0)] != 0);
    do {
      const int col1 = way[static_cast<std::size_t>(col0)];
      match[static_cast<std::size_t>(col0)] = match[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> result(static_cast<std::size_t>(rows), -1);
  for (int c = 1; c <= n; ++c) {
    const int r = match[static_cast<std::size_t>(c)] - 1;
    if (r < rows && c - 1 < cols) result[static_cast<std::size_t>(r)] = c - 1;
  }
  return result;
}

}  // namespace cpsc
