#pragma once

#include "cpsc/affinity.hpp"
#include "cpsc/core_data.hpp"
#include "cpsc/spectral.hpp"
#include "cpsc/tuning.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cpsc::cli {

/// Method id and whatever parameters it takes. Absent values are either
/// defaulted (ncm, hybrid sigma) or reported as a configuration error.
struct MethodConfig {
  std::string method;
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::optional<int> k_nn;
  std::optional<double> gamma;
  std::optional<double> bandwidth;
  std::string ncm = "knn";
  std::optional<double> deterministic_tau;
  bool tune = false;
  std::vector<double> grid_epsilon;
  std::vector<int> grid_k;
};

const std::vector<std::string>& method_names();

/// Throws std::invalid_argument naming the missing or invalid flag.
void validate_method(const MethodConfig& config);

/// Applies "minmax", "zscore" or "none".
Dataset apply_normalization(const Dataset& data, const std::string& mode);

struct MethodRun {
  ClusteringResult result;
  std::optional<AffinityMatrix> affinity;     // kept when requested
  std::optional<NeighborhoodGraph> graph;     // graph-based methods only
  std::optional<TuneReport> tune;             // tuned runs only
  nlohmann::json parameters;                  // effective parameters
};

/// Builds the method's affinity on `data` and clusters it. Seeds for tau
/// and k-means are derived from `seed`.
MethodRun run_method(const Dataset& data, const DistanceMatrix& dm, const MethodConfig& config,
                     int k_clusters, std::uint64_t seed, bool keep_affinity, int jobs = 1);

/// ARI/NMI/CE against ground truth (when present) and the silhouette (when
/// defined); missing values are null.
nlohmann::json evaluate(const Dataset& data, const DistanceMatrix& dm, const std::vector<int>& labels);

}  // namespace cpsc::cli
