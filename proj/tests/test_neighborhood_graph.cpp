#include "cpsc/neighborhood_graph.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace cpsc;
using cpsc::test::line_points;

TEST_CASE("epsilon graph uses a strict inequality") {
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 3}));
  const NeighborhoodGraph g = build_epsilon_graph(dm, 1.5);
  CHECK(g.kind() == GraphKind::epsilon);
  CHECK_FALSE(g.directed());
  CHECK(g.edge_count() == 1);
  CHECK(neighborhood(g, 0) == std::vector<std::size_t>{1});
  CHECK(neighborhood(g, 2).empty());
  CHECK_THROWS_AS(neighborhood(g, 3), std::out_of_range);

  CHECK(build_epsilon_graph(dm, 0.0).edge_count() == 0);
  CHECK(build_epsilon_graph(dm, 1.0).edge_count() == 0);  // d = 1 is not < 1
  CHECK(build_epsilon_graph(dm, 3.5).edge_count() == 3);
  CHECK_THROWS_AS(build_epsilon_graph(dm, -0.1), std::invalid_argument);
}

TEST_CASE("kNN graph examples") {
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 3}));
  const NeighborhoodGraph g = build_knn_graph(dm, 1);
  CHECK(g.directed());
  CHECK(neighborhood(g, 0) == std::vector<std::size_t>{1});
  CHECK(neighborhood(g, 1) == std::vector<std::size_t>{0});
  CHECK(neighborhood(g, 2) == std::vector<std::size_t>{1});

  const NeighborhoodGraph full = build_knn_graph(dm, 10);
  for (std::size_t u = 0; u < 3; ++u) CHECK(full.neighbors(u).size() == 2);
  CHECK_THROWS_AS(build_knn_graph(dm, 0), std::invalid_argument);

  // Points 2 and 5 are both at distance 1 from point 0.
  const DistanceMatrix tie = pairwise_distances(line_points({0, 10, 1, 20, 30, -1}));
  CHECK(build_knn_graph(tie, 1).neighbors(0) == std::vector<std::size_t>{2});
  CHECK(build_knn_graph(tie, 2).neighbors(0) == std::vector<std::size_t>{2, 5});
}

TEST_CASE("graph invariants on random data") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset data = seed % 2 ? cpsc::test::gaussian_points(seed, 30, 2) : cpsc::test::lattice_points(seed, 30, 4);
    const DistanceMatrix dm = pairwise_distances(data);
    const std::size_t n = data.size();

    std::size_t previous = 0;
    for (double eps = 0.0; eps <= dm.max_dist + 0.5; eps += 0.25) {
      const NeighborhoodGraph g = build_epsilon_graph(dm, eps);
      CHECK(g.edge_count() >= previous);
      previous = g.edge_count();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = g.neighbors(i);
        CHECK(std::find(nb.begin(), nb.end(), i) == nb.end());
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const bool edge = std::find(nb.begin(), nb.end(), j) != nb.end();
          CHECK(edge == (dm(i, j) < eps));
        }
      }
    }

    for (int k : {1, 3, 7, 40}) {
      const NeighborhoodGraph g = build_knn_graph(dm, k);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dm(i, a) < dm(i, b); });
        order.resize(std::min<std::size_t>(static_cast<std::size_t>(k), n - 1));
        CHECK(g.neighbors(i) == order);
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) CHECK(common_neighbors(g, i, j) == common_neighbors(g, j, i));
    }
  }
}

TEST_CASE("common_neighbors") {
  // 0 -> {2,3}, 1 -> {3,4}
  NeighborhoodGraph g(GraphKind::knn, 0.0, 2, {{2, 3}, {3, 4}, {0, 1}, {0, 1}, {0, 1}});
  CHECK(common_neighbors(g, 0, 1) == 1);
  NeighborhoodGraph disjoint(GraphKind::knn, 0.0, 2, {{2, 3}, {4, 5}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  CHECK(common_neighbors(disjoint, 0, 1) == 0);
  NeighborhoodGraph same(GraphKind::knn, 0.0, 4, {{2, 3, 4, 5}, {2, 3, 4, 5}, {0, 1, 3, 4}, {0, 1, 2, 4}, {0, 1, 2, 3}, {0, 1, 2, 3}});
  CHECK(common_neighbors(same, 0, 1) == 4);
  // i and j themselves are not counted.
  NeighborhoodGraph mutual(GraphKind::knn, 0.0, 2, {{1, 2}, {0, 2}, {0, 1}});
  CHECK(common_neighbors(mutual, 0, 1) == 1);
  CHECK_THROWS(common_neighbors(g, 1, 1));
}

TEST_CASE("edge list dump") {
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 3}));
  std::ostringstream out;
  write_edge_list_csv(build_epsilon_graph(dm, 2.5), dm, out);
  CHECK(out.str() == "i,j,dist\n0,1,1\n1,2,2\n");
}
