#pragma once

#include "cpsc/affinity.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace cpsc {

/// Labels produced by a clustering run plus diagnostics.
struct ClusteringResult {
  std::vector<int> labels;  // 0..k_clusters-1, numbered by first appearance
  int k_clusters = 0;
  double distortion = 0.0;  // k-means within-cluster sum of squares
  std::uint64_t seed = 0;
  Eigen::VectorXd eigenvalues;  // empty when k-means ran on raw points
  int restarts = 0;
};

struct SpectralEmbedding {
  Eigen::MatrixXd vectors;      // n x k, orthonormal columns
  Eigen::MatrixXd normalized;   // rows scaled to unit length (zero rows stay zero)
  Eigen::VectorXd eigenvalues;  // descending
};

/// L = D^-1/2 A D^-1/2 with D_ii = sum_j A_ij. Zero-degree rows use D_ii = 1,
/// which leaves them zero. Throws std::invalid_argument when A is not
/// symmetric within 1e-12.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity);

/// The k largest eigenpairs of a symmetric matrix, eigenvalues descending.
/// Each eigenvector is signed so that its largest-magnitude entry (first
/// one on ties) is positive. Throws std::invalid_argument for k outside
/// [1, n] and NumericalError if the solver fails.
SpectralEmbedding top_k_eigenvectors(const Eigen::MatrixXd& symmetric, int k);

/// Scales each row to unit Euclidean norm; all-zero rows are left as is.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& x);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-9;  // stop when no centroid moves farther than this
};

/// k-means++ seeding followed by Lloyd iterations, repeated with seeds
/// derived from `seed`; the run with the lowest distortion wins (earliest
/// restart on ties). A cluster that empties out is re-seeded at the point
/// farthest from its current centroid.
ClusteringResult kmeans(const Eigen::MatrixXd& points, int k_clusters, std::uint64_t seed,
                        const KMeansOptions& options = {});

/// Laplacian -> top-k eigenvectors -> row normalization -> k-means.
ClusteringResult spectral_cluster(const AffinityMatrix& affinity, int k_clusters, std::uint64_t seed,
                                  const KMeansOptions& options = {});
ClusteringResult spectral_cluster(const Eigen::MatrixXd& affinity, int k_clusters, std::uint64_t seed,
                                  const KMeansOptions& options = {});

}  // namespace cpsc
