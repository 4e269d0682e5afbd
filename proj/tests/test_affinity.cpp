#include "cpsc/affinity.hpp"
#include "cpsc/spectral.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cpsc;
using cpsc::test::from_rows;
using cpsc::test::line_points;

namespace {

void check_basic_invariants(const AffinityMatrix& a, double upper) {
  const Eigen::Index n = a.values.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(a.values(i, i) == 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      CHECK(std::isfinite(a.values(i, j)));
      CHECK(a.values(i, j) >= 0.0);
      CHECK(a.values(i, j) <= upper);
      if (a.symmetric) CHECK(a.values(i, j) == a.values(j, i));
    }
  }
}

// Brute-force conformal affinity: one full p-value computation per entry.
Eigen::MatrixXd reference_cpsc(const Dataset& data, const NeighborhoodGraph& g, const NcmSpec& ncm,
                               const TauMode& tau) {
  const std::size_t n = data.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      std::vector<std::size_t> members;
      for (std::size_t m : g.neighbors(j))
        if (m != i) members.push_back(m);
      if (members.empty()) continue;
      PointMatrix s0(static_cast<Eigen::Index>(members.size()), data.points.cols());
      for (std::size_t a = 0; a < members.size(); ++a)
        s0.row(static_cast<Eigen::Index>(a)) = data.points.row(static_cast<Eigen::Index>(members[a]));
      const double t = conformal_pair_tau(tau, i, j);
      double p = 0.0;
      if (const auto* knn = std::get_if<KnnNcm>(&ncm)) {
        p = cpsc::oracle::knn_p_value(s0, data.point(i), knn->k_nn, t);
      } else {
        p = p_value(data.point(i), s0, ncm, t);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("gaussian affinity examples") {
  const double sigma = 0.8;
  const DistanceMatrix dm = pairwise_distances(line_points({0, 0, sigma * std::sqrt(2.0)}));
  const AffinityMatrix a = gaussian_affinity(dm, sigma);
  CHECK(a.values(0, 1) == 1.0);
  CHECK(a.values(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(gaussian_affinity(pairwise_distances(line_points({0, 2})), 1.0).values(0, 1) ==
        doctest::Approx(0.1353352832366127).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_affinity(dm, 0.0), std::invalid_argument);
  CHECK(a.builder.find("gaussian") == 0);
}

TEST_CASE("local scale affinity examples") {
  const AffinityMatrix a = local_scale_affinity(pairwise_distances(line_points({0, 1, 2})), 1);
  CHECK(a.values(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(a.values(0, 2) == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
  const AffinityMatrix dup = local_scale_affinity(pairwise_distances(line_points({0, 0, 5})), 1);
  CHECK(dup.values(0, 1) == 1.0);
  CHECK(std::isfinite(dup.values(0, 2)));
  CHECK_THROWS_AS(local_scale_affinity(pairwise_distances(line_points({0})), 1), std::invalid_argument);
}

TEST_CASE("CNN affinity: zero common neighbours is exactly Gaussian, one halves the exponent") {
  const Dataset d = cpsc::test::gaussian_points(3, 20, 2);
  const DistanceMatrix dm = pairwise_distances(d);
  const NeighborhoodGraph g = build_knn_graph(dm, 3);
  const AffinityMatrix cnn = cnn_affinity(dm, 0.7, g);
  const AffinityMatrix gauss = gaussian_affinity(dm, 0.7);
  int zero_pairs = 0;
  int one_pairs = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (i == j) {
        CHECK(cnn.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == 0.0);
        continue;
      }
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      const std::size_t c = common_neighbors(g, i, j);
      if (c == 0) {
        CHECK(cnn.values(ii, jj) == gauss.values(ii, jj));
        ++zero_pairs;
      } else if (c == 1) {
        CHECK(cnn.values(ii, jj) == doctest::Approx(std::sqrt(gauss.values(ii, jj))).epsilon(1e-12));
        ++one_pairs;
      }
    }
  }
  CHECK(zero_pairs > 0);
  CHECK(one_pairs > 0);
  CHECK_THROWS_AS(cnn_affinity(dm, 0.7, build_knn_graph(pairwise_distances(line_points({0, 1})), 1)),
                  std::invalid_argument);
}

TEST_CASE("NP affinity: chain example and fixed points") {
  // d01 = 1, d12 = 1.5, d02 = 2.5 with epsilon 2: 0-1 and 1-2 linked, 0-2 not.
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 2.5}));
  const double sigma = 1.0;
  const AffinityMatrix gauss = gaussian_affinity(dm, sigma);
  const AffinityMatrix np = np_affinity(dm, sigma, 2.0);
  CHECK(np.values(0, 2) == std::min(gauss.values(0, 1), gauss.values(1, 2)));
  CHECK(np.values(2, 0) == np.values(0, 2));
  CHECK(np.values(0, 1) == gauss.values(0, 1));

  CHECK(np_affinity(dm, sigma, 0.0).values == gauss.values);
  CHECK(np_affinity(dm, sigma, 10.0).values == gauss.values);  // already complete
  CHECK_THROWS_AS(np_affinity(dm, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("NP affinity properties on random data") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset d = cpsc::test::gaussian_points(seed, 25, 2);
    const DistanceMatrix dm = pairwise_distances(d);
    const double eps = 0.6;
    const AffinityMatrix gauss = gaussian_affinity(dm, 0.5);
    const AffinityMatrix np = np_affinity(dm, 0.5, eps);
    check_basic_invariants(np, 1.0);
    for (Eigen::Index i = 0; i < 25; ++i) {
      for (Eigen::Index j = 0; j < 25; ++j) {
        if (dm.dist(i, j) < eps) {
          CHECK(np.values(i, j) == gauss.values(i, j));
        } else {
          // Propagated entries are a min over links shorter than epsilon,
          // so they can only rise above the Gaussian value.
          CHECK(np.values(i, j) >= gauss.values(i, j));
        }
      }
    }
    // Fixed point: propagating again changes nothing.
    for (Eigen::Index i = 0; i < 25; ++i)
      for (Eigen::Index k = 0; k < 25; ++k)
        for (Eigen::Index j = 0; j < 25; ++j) {
          if (i == k || i == j || j == k) continue;
          const bool ij = dm.dist(i, j) < eps || np.values(i, j) != gauss.values(i, j);
          const bool jk = dm.dist(j, k) < eps || np.values(j, k) != gauss.values(j, k);
          if (ij && jk) {
            const bool ik = dm.dist(i, k) < eps || np.values(i, k) != gauss.values(i, k) ||
                            np.values(i, k) == std::min(np.values(i, j), np.values(j, k));
            CHECK(ik);
          }
        }
  }
}

TEST_CASE("SNN and cSNN examples") {
  // 0 -> {2,3}, 1 -> {3,4}; k = 2.
  NeighborhoodGraph g(GraphKind::knn, 0.0, 2, {{2, 3}, {3, 4}, {0, 1}, {0, 1}, {0, 1}});
  const AffinityMatrix snn = snn_affinity(g, 2);
  CHECK(snn.values(0, 1) == 0.5);
  CHECK(snn.values(0, 0) == 0.0);
  CHECK_THROWS_AS(snn_affinity(g, 3), std::invalid_argument);

  // Only pair (0,1) shares a neighbour (2), ranked first in both lists.
  NeighborhoodGraph single(GraphKind::knn, 0.0, 2, {{2, 3}, {2, 4}, {}, {}, {}});
  const AffinityMatrix one = csnn_affinity(single, 2);
  CHECK(one.values(0, 1) == 1.0);
  CHECK(one.values(1, 0) == 1.0);
  CHECK(one.values.sum() == 2.0);
  CHECK(one.warnings.empty());

  // Shared neighbour ranked last (k-th) in both lists contributes 1 to w:
  // pair (0,1) shares 3 at rank 2; pair (2,3) shares 0 at rank 1 (w = 4).
  NeighborhoodGraph ranks(GraphKind::knn, 0.0, 2, {{4, 3}, {5, 3}, {0, 6}, {0, 7}, {}, {}, {}, {}});
  const AffinityMatrix r = csnn_affinity(ranks, 2);
  CHECK(r.values(2, 3) == 1.0);
  CHECK(r.values(0, 1) == 0.25);

  NeighborhoodGraph none(GraphKind::knn, 0.0, 1, {{1}, {2}, {0}});
  const AffinityMatrix zero = csnn_affinity(none, 1);
  CHECK(zero.values.isZero(0.0));
  CHECK(zero.warnings.size() == 1);
  CHECK_THROWS_AS(csnn_affinity(build_epsilon_graph(pairwise_distances(line_points({0, 1})), 2.0), 1),
                  std::invalid_argument);
}

TEST_CASE("PG affinity examples") {
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 3}));
  const AffinityMatrix g1 = pg_affinity(dm, 1.0);
  CHECK(g1.values(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(g1.values(1, 1) == 0.0);
  const AffinityMatrix g2 = pg_affinity(dm, 2.0);
  CHECK((g2.values - g1.values.cwiseProduct(g1.values)).cwiseAbs().maxCoeff() <= 1e-12);
  const AffinityMatrix dup = pg_affinity(pairwise_distances(line_points({2, 2})), 1.0);
  CHECK(dup.values(0, 1) == 1.0);
  CHECK_THROWS_AS(pg_affinity(dm, 0.0), std::invalid_argument);
}

TEST_CASE("Gaussian and PG are monotone decreasing in distance") {
  const Dataset d = line_points({0, 0.1, 0.3, 0.7, 1.5, 3.1, 6.3});
  const DistanceMatrix dm = pairwise_distances(d);
  const AffinityMatrix g = gaussian_affinity(dm, 1.0);
  const AffinityMatrix p = pg_affinity(dm, 1.7);
  for (Eigen::Index j = 2; j < 7; ++j) {
    CHECK(g.values(0, j) < g.values(0, j - 1));
    CHECK(p.values(0, j) < p.values(0, j - 1));
  }
}

TEST_CASE("CPSC examples") {
  // Point 3 sits far from everyone: with epsilon 1 its neighbourhood is empty.
  const Dataset d = line_points({0, 0.1, 0.2, 9});
  const DistanceMatrix dm = pairwise_distances(d);
  const NeighborhoodGraph g = build_epsilon_graph(dm, 1.0);
  const AffinityMatrix a = cpsc_asymmetric(d, dm, g, KnnNcm{1}, FixedTau{1.0});
  CHECK_FALSE(a.symmetric);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(a.values(i, 3) == 0.0);
  // 0.1 is the middle of Nbd(z_0) \ {z_1} ∪ {z_1} = {0.1, 0.2} plus itself.
  CHECK(a.values(1, 0) > 0.0);

  const Dataset same = line_points({4, 4, 4, 4});
  const DistanceMatrix dsame = pairwise_distances(same);
  const AffinityMatrix all = cpsc_asymmetric(same, dsame, build_knn_graph(dsame, 2), KnnNcm{2}, FixedTau{1.0});
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(all.values(i, j) == (i == j ? 0.0 : 1.0));

  // Nbd(z_3) = {0, 1, 2}; without z_1 the calibration set is {0, 2}, and the
  // test point 1 sits between them, so it is the most conforming.
  const Dataset chain = line_points({0, 1, 2, 3});
  const DistanceMatrix dc = pairwise_distances(chain);
  const AffinityMatrix t = cpsc_asymmetric(chain, dc, build_epsilon_graph(dc, 10.0), KnnNcm{2}, FixedTau{1.0});
  CHECK(t.values(1, 3) == 1.0);
  // Test point 3 against {0, 1}: scores 3+2, 1+1, 1+2 put it strictly last.
  CHECK(t.values(3, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("CPSC batch matches a brute-force p-value per entry, ties included") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const bool lattice = seed % 2 == 0;
    Dataset d = lattice ? cpsc::test::lattice_points(seed, 24, 4) : cpsc::test::gaussian_points(seed, 24, 2);
    const DistanceMatrix dm = pairwise_distances(d);
    const NeighborhoodGraph eg = build_epsilon_graph(dm, lattice ? 2.1 : 1.2);
    const NeighborhoodGraph kg = build_knn_graph(dm, 5);
    const std::vector<ConformalRequest> requests = {
        {KnnNcm{1}, FixedTau{1.0}},
        {KnnNcm{3}, SmoothedTau{seed}},
        {KnnNcm{30}, SmoothedTau{seed + 1}},
        {KdeNcm{0.5}, SmoothedTau{seed + 2}},
        {KdeNcm{2.0}, FixedTau{0.5}},
    };
    for (const NeighborhoodGraph* g : {&eg, &kg}) {
      const auto batch = cpsc_asymmetric_batch(d, dm, *g, requests);
      for (std::size_t r = 0; r < requests.size(); ++r) {
        const Eigen::MatrixXd expected = reference_cpsc(d, *g, requests[r].ncm, requests[r].tau);
        CHECK(batch[r] == expected);
        const AffinityMatrix single = cpsc_asymmetric(d, dm, *g, requests[r].ncm, requests[r].tau);
        CHECK(single.values == batch[r]);
      }
    }
  }
}

TEST_CASE("conformal_pair_tau gives each directed entry its own reproducible draw") {
  const TauMode mode = SmoothedTau{99};
  CHECK(conformal_pair_tau(mode, 2, 5) == conformal_pair_tau(mode, 2, 5));
  CHECK(conformal_pair_tau(mode, 2, 5) != conformal_pair_tau(mode, 5, 2));
  CHECK(conformal_pair_tau(FixedTau{0.3}, 4, 1) == 0.3);
}

TEST_CASE("CPSCA is the exact mean of CPSC and its transpose; hybrid adds the Gaussian term") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = cpsc::test::gaussian_points(seed, 30, 3);
    const DistanceMatrix dm = pairwise_distances(d);
    const NeighborhoodGraph g = build_epsilon_graph(dm, 1.5);
    const TauMode tau = SmoothedTau{seed};
    const AffinityMatrix directed = cpsc_asymmetric(d, dm, g, KnnNcm{4}, tau);
    const AffinityMatrix sym = cpsca_symmetric(d, dm, g, KnnNcm{4}, tau);
    check_basic_invariants(directed, 1.0);
    check_basic_invariants(sym, 1.0);
    for (Eigen::Index i = 0; i < 30; ++i)
      for (Eigen::Index j = 0; j < 30; ++j)
        CHECK(sym.values(i, j) == (directed.values(i, j) + directed.values(j, i)) / 2.0);
    CHECK(symmetrize_mean(directed.values) == sym.values);

    const AffinityMatrix hybrid = hybrid_affinity(d, dm, g, KnnNcm{4}, tau, 0.9);
    check_basic_invariants(hybrid, 2.0);
    const AffinityMatrix gauss = gaussian_affinity(dm, 0.9);
    CHECK((hybrid.values - sym.values - gauss.values).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(hybrid_affinity(d, dm, g, KnnNcm{4}, tau, 0.0), std::invalid_argument);
  }
}

TEST_CASE("hybrid examples") {
  // Duplicates: conformal part 1 and Gaussian part 1.
  const Dataset dup = line_points({1, 1, 1});
  const DistanceMatrix dd = pairwise_distances(dup);
  const AffinityMatrix top = hybrid_affinity(dup, dd, build_knn_graph(dd, 2), KnnNcm{1}, FixedTau{1.0}, 0.5);
  CHECK(top.values(0, 1) == 2.0);

  // Empty neighbourhoods: only the Gaussian floor remains.
  const double sigma = 0.5;
  const Dataset pair = line_points({0, sigma * std::sqrt(2.0)});
  const DistanceMatrix dp = pairwise_distances(pair);
  const AffinityMatrix floor = hybrid_affinity(pair, dp, build_epsilon_graph(dp, 0.0), KnnNcm{1}, FixedTau{1.0}, sigma);
  CHECK(floor.values(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  const Dataset far = line_points({0, 1000});
  const DistanceMatrix df = pairwise_distances(far);
  CHECK(hybrid_affinity(far, df, build_epsilon_graph(df, 1.0), KnnNcm{1}, FixedTau{1.0}, 1.0).values(0, 1) == 0.0);
}

TEST_CASE("conformal builders are pure functions under deterministic tau") {
  const Dataset d = cpsc::test::gaussian_points(77, 40, 2);
  const DistanceMatrix dm = pairwise_distances(d);
  const NeighborhoodGraph g = build_epsilon_graph(dm, 1.0);
  CHECK(cpsca_symmetric(d, dm, g, KnnNcm{3}, FixedTau{0.7}).values ==
        cpsca_symmetric(d, g, KnnNcm{3}, FixedTau{0.7}).values);
}

TEST_CASE("every builder gives a valid matrix whose Laplacian spectrum lies in [-1, 1]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = seed % 3 == 0 ? cpsc::test::lattice_points(seed, 30, 5) : cpsc::test::gaussian_points(seed, 30, 2);
    const DistanceMatrix dm = pairwise_distances(d);
    const NeighborhoodGraph kg = build_knn_graph(dm, 4);
    const NeighborhoodGraph eg = build_epsilon_graph(dm, seed % 3 == 0 ? 1.5 : 0.8);
    const std::vector<AffinityMatrix> all = {
        gaussian_affinity(dm, 0.5),
        local_scale_affinity(dm, 4),
        cnn_affinity(dm, 0.5, kg),
        np_affinity(dm, 0.5, 0.6),
        snn_affinity(kg, 4),
        csnn_affinity(kg, 4),
        pg_affinity(dm, 1.5),
        cpsca_symmetric(d, dm, eg, KnnNcm{3}, SmoothedTau{seed}),
        cpsca_symmetric(d, dm, eg, KdeNcm{0.4}, SmoothedTau{seed}),
        hybrid_affinity(d, dm, eg, KnnNcm{3}, SmoothedTau{seed}, default_hybrid_sigma(dm, 3)),
    };
    for (const AffinityMatrix& a : all) {
      CAPTURE(a.builder);
      check_basic_invariants(a, a.builder.rfind("hybrid", 0) == 0 ? 2.0 : 1.0);
      const Eigen::MatrixXd l = normalized_laplacian(a.values);
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(l).eigenvalues();
      CHECK(ev.minCoeff() >= -1.0 - 1e-9);
      CHECK(ev.maxCoeff() <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("default hybrid sigma and CSV dump") {
  const DistanceMatrix dm = pairwise_distances(line_points({0, 1, 3}));
  // 2nd nearest distances: 3, 2, 3.
  CHECK(default_hybrid_sigma(dm, 2) == doctest::Approx(8.0 / 3.0));
  CHECK(default_hybrid_sigma(pairwise_distances(line_points({5, 5})), 1) == 1.0);
  std::ostringstream out;
  write_affinity_csv(gaussian_affinity(pairwise_distances(line_points({0, 0})), 1.0), out);
  CHECK(out.str() == "0,1\n1,0\n");
}
