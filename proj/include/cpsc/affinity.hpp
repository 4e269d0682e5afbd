#pragma once

#include "cpsc/conformal.hpp"
#include "cpsc/core_data.hpp"
#include "cpsc/neighborhood_graph.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cpsc {

/// Non-negative n x n similarity matrix with a zero diagonal.
struct AffinityMatrix {
  Eigen::MatrixXd values;
  /// Formula and parameters, e.g. "gaussian(sigma=0.1)".
  std::string builder;
  bool symmetric = true;
  std::vector<std::string> warnings;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// A_ij = exp(-d_ij^2 / (2 sigma^2)).
AffinityMatrix gaussian_affinity(const DistanceMatrix& dm, double sigma);

/// Local-scale affinity: sigma_i is the mean distance from i to its k_nn
/// nearest others, A_ij = exp(-d_ij^2 / (sigma_i sigma_j)). A zero sigma_i
/// (duplicated point) is replaced by the smallest positive sigma, or 1.
AffinityMatrix local_scale_affinity(const DistanceMatrix& dm, int k_nn);

/// Gaussian with the bandwidth widened by common neighbours on `graph`:
/// A_kl = exp(-d_kl^2 / (2 sigma^2 (CNN_kl + 1))).
AffinityMatrix cnn_affinity(const DistanceMatrix& dm, double sigma, const NeighborhoodGraph& graph);

/// Neighbour propagation. Starts from the Gaussian matrix and the relation
/// b_ij = [d_ij < epsilon]; whenever b_ij = b_jk = 1 and b_ik = 0 the pair
/// (i,k) is linked with a_ik = a_ki = min(a_ij, a_jk). Iterated to a fixed
/// point in synchronous sweeps; a pair reachable through several middle
/// points j in the same sweep takes the largest min(a_ij, a_jk).
AffinityMatrix np_affinity(const DistanceMatrix& dm, double sigma, double epsilon);

/// A_ij = |N_i ∩ N_j| / k_nn on a directed kNN graph built with k_nn.
AffinityMatrix snn_affinity(const NeighborhoodGraph& graph, int k_nn);

/// Rank-weighted shared neighbours,
/// w_ij = sum over shared z_r of (k - rank_i(r) + 1)(k - rank_j(r) + 1),
/// normalized by the global maximum of w. All-zero w gives an all-zero
/// matrix and a warning.
AffinityMatrix csnn_affinity(const NeighborhoodGraph& graph, int k_nn);

/// Powered Gaussian: beta = max_i min_{j != i} d_ij (1 if zero),
/// A_ij = exp(-d_ij^2 / beta)^gamma.
AffinityMatrix pg_affinity(const DistanceMatrix& dm, double gamma);

/// One conformal affinity to build: the non-conformity measure and the tau
/// policy for its p-values.
struct ConformalRequest {
  NcmSpec ncm;
  TauMode tau;
};

/// Tau used for directed entry (i, j). Each unordered pair owns one stream
/// keyed by (min, max); the entry with i < j takes the first draw and the
/// entry with i > j the second.
double conformal_pair_tau(const TauMode& mode, std::size_t i, std::size_t j);

/// A_ij = p-value of z_i against Nbd(z_j) \ {z_i}, 0 when that set is empty.
/// Not symmetric.
AffinityMatrix cpsc_asymmetric(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau);
AffinityMatrix cpsc_asymmetric(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau);

/// Builds several directed conformal matrices over one graph at once,
/// sharing the per-neighbourhood distance sorting between requests. Each
/// output is identical to a cpsc_asymmetric call with the same request.
std::vector<Eigen::MatrixXd> cpsc_asymmetric_batch(const Dataset& data, const DistanceMatrix& dm,
                                                   const NeighborhoodGraph& graph,
                                                   std::span<const ConformalRequest> requests);

/// (M + M^T) / 2.
Eigen::MatrixXd symmetrize_mean(const Eigen::MatrixXd& m);

/// Symmetric conformal affinity: mean of the two directed p-values.
AffinityMatrix cpsca_symmetric(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau);
AffinityMatrix cpsca_symmetric(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau);

/// Symmetric conformal affinity plus a Gaussian term; entries in [0, 2].
AffinityMatrix hybrid_affinity(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau, double sigma);
AffinityMatrix hybrid_affinity(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau, double sigma);

/// Adds the Gaussian term to an already symmetrized conformal matrix.
Eigen::MatrixXd add_gaussian_term(const Eigen::MatrixXd& conformal, const DistanceMatrix& dm,
                                  double sigma);

/// Default sigma for the hybrid's Gaussian term: mean over points of the
/// distance to the k_nn-th nearest other point (1 if that mean is zero).
double default_hybrid_sigma(const DistanceMatrix& dm, int k_nn);

/// Dense CSV dump of the matrix values.
void write_affinity_csv(const AffinityMatrix& a, std::ostream& out);

}  // namespace cpsc
