#pragma once

#include "cpsc/core_data.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace cpsc {

enum class GraphKind { epsilon, knn };

/// Adjacency lists over point indices. Never contains self-loops.
///
/// Epsilon graphs are undirected (j in N(i) iff d(i,j) < epsilon) with lists
/// in ascending index order. kNN graphs are directed; each list holds the
/// min(k, n-1) nearest other points ordered by (distance, index).
class NeighborhoodGraph {
 public:
  NeighborhoodGraph(GraphKind kind, double epsilon, int k_nn,
                    std::vector<std::vector<std::size_t>> adjacency);

  GraphKind kind() const { return kind_; }
  bool directed() const { return kind_ == GraphKind::knn; }
  double epsilon() const { return epsilon_; }
  int k_nn() const { return k_nn_; }
  std::size_t size() const { return adjacency_.size(); }

  /// Throws std::out_of_range for u >= size().
  const std::vector<std::size_t>& neighbors(std::size_t u) const;

  /// Number of edges: directed arcs for kNN, unordered pairs for epsilon.
  std::size_t edge_count() const;

 private:
  GraphKind kind_;
  double epsilon_;
  int k_nn_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Throws std::invalid_argument for negative or non-finite epsilon.
NeighborhoodGraph build_epsilon_graph(const DistanceMatrix& dm, double epsilon);

/// Throws std::invalid_argument for k_nn < 1. Ties go to the lower index.
NeighborhoodGraph build_knn_graph(const DistanceMatrix& dm, int k_nn);

const std::vector<std::size_t>& neighborhood(const NeighborhoodGraph& g, std::size_t u);

/// |N(i) ∩ N(j)| with i and j themselves excluded. Throws for i == j.
std::size_t common_neighbors(const NeighborhoodGraph& g, std::size_t i, std::size_t j);

/// Debug dump: "i,j,dist" per edge (each undirected edge once, i < j).
void write_edge_list_csv(const NeighborhoodGraph& g, const DistanceMatrix& dm, std::ostream& out);

}  // namespace cpsc
