#include "cpsc/neighborhood_graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cpsc {

NeighborhoodGraph::NeighborhoodGraph(GraphKind kind, double epsilon, int k_nn,
                                     std::vector<std::vector<std::size_t>> adjacency)
    : kind_(kind), epsilon_(epsilon), k_nn_(k_nn), adjacency_(std::move(adjacency)) {}

const std::vector<std::size_t>& NeighborhoodGraph::neighbors(std::size_t u) const {
  if (u >= adjacency_.size()) {
    throw std::out_of_range("node " + std::to_string(u) + " out of range for graph of " +
                            std::to_string(adjacency_.size()) + " nodes");
  }
  return adjacency_[u];
}

std::size_t NeighborhoodGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& adj : adjacency_) total += adj.size();
  return directed() ? total : total / 2;
}

NeighborhoodGraph build_epsilon_graph(const DistanceMatrix& dm, double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be finite and >= 0");
  }
  const std::size_t n = dm.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dm(i, j) < epsilon) adjacency[i].push_back(j);
    }
  }
  return {GraphKind::epsilon, epsilon, 0, std::move(adjacency)};
}

NeighborhoodGraph build_knn_graph(const DistanceMatrix& dm, int k_nn) {
  if (k_nn < 1) throw std::invalid_argument("k_nn must be >= 1");
  const std::size_t n = dm.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_nn), n - 1);
  std::vector<std::vector<std::size_t>> adjacency(n);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    auto closer = [&](std::size_t a, std::size_t b) {
      const double da = dm(i, a);
      const double db = dm(i, b);
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      closer);
    adjacency[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return {GraphKind::knn, 0.0, k_nn, std::move(adjacency)};
}

const std::vector<std::size_t>& neighborhood(const NeighborhoodGraph& g, std::size_t u) {
  return g.neighbors(u);
}

std::size_t common_neighbors(const NeighborhoodGraph& g, std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("common_neighbors requires i != j");
  std::vector<std::size_t> a = g.neighbors(i);
  std::vector<std::size_t> b = g.neighbors(j);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      if (*ia != i && *ia != j) ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

void write_edge_list_csv(const NeighborhoodGraph& g, const DistanceMatrix& dm, std::ostream& out) {
  out << "i,j,dist\n" << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j : g.neighbors(i)) {
      if (!g.directed() && j < i) continue;
      out << i << ',' << j << ',' << dm(i, j) << '\n';
    }
  }
}

}  // namespace cpsc
