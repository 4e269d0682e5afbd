#pragma once

#include "cpsc/conformal.hpp"
#include "cpsc/core_data.hpp"
#include "cpsc/random.hpp"
#include "cpsc/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cpsc {

enum class ConformalVariant { cpsca, hybrid };

enum class CellStatus { ok, empty_graph, degenerate, numerical_error };

const char* to_string(CellStatus status);

struct TuneOptions {
  ConformalVariant variant = ConformalVariant::cpsca;
  /// Only the kind matters for kNN (k_nn comes from the grid); a KDE
  /// bandwidth is used as given.
  NcmSpec ncm = KnnNcm{};
  /// Fixed tau instead of seeded smoothing.
  std::optional<double> deterministic_tau;
  /// Gaussian term bandwidth for the hybrid; default_hybrid_sigma(dm, k_nn)
  /// of the cell when unset.
  std::optional<double> hybrid_sigma;
  /// Empty means 0.01, 0.02, ... up to the largest pairwise distance.
  std::vector<double> epsilons;
  /// Empty means 1..30. Values above n-1 are clamped.
  std::vector<int> k_values;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  KMeansOptions kmeans;
};

struct TuneCell {
  double epsilon = 0.0;
  int k_nn = 0;
  double silhouette = 0.0;  // meaningful only when status == ok
  CellStatus status = CellStatus::ok;
};

struct TuneReport {
  bool found = false;  // false when every cell failed
  double best_epsilon = 0.0;
  int best_k_nn = 0;
  double best_silhouette = 0.0;
  ClusteringResult best;
  std::vector<TuneCell> grid;  // (epsilon, k_nn) lexicographic order
};

/// Epsilon values t / 100 for t = 1 .. floor(100 * max_dist).
std::vector<double> default_epsilon_grid(double max_dist);

/// The k_nn axis after clamping to [1, n-1] and removing duplicates.
std::vector<int> resolve_k_grid(const std::vector<int>& requested, std::size_t n);

/// Silhouette-maximizing search over (epsilon, k_nn) for the conformal
/// affinities. Each cell builds the epsilon-graph, the conformal affinity and
/// a spectral clustering, then scores the labels with the silhouette on
/// `data`'s own distances. Ties prefer the smaller epsilon, then the smaller
/// k_nn. With the KDE measure and the plain symmetric variant, k_nn has no
/// effect, so only the first k value is evaluated.
///
/// Throws std::invalid_argument for k_clusters < 2 or an empty grid.
TuneReport tune_cpsc(const Dataset& data, int k_clusters, const TuneOptions& options);

/// "epsilon,k_nn,silhouette,status"; failed cells leave the score empty.
void write_grid_csv(const TuneReport& report, std::ostream& out);

}  // namespace cpsc
