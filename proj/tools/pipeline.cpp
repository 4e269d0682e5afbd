#include "pipeline.hpp"

#include "cpsc/error.hpp"
#include "cpsc/metrics.hpp"
#include "cpsc/neighborhood_graph.hpp"
#include "cpsc/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpsc::cli {

namespace {

bool is_conformal(const std::string& method) {
  return method == "cpsc" || method == "cpsca" || method == "hybrid";
}

void require(bool present, const char* flag, const std::string& method) {
  if (!present) {
    throw std::invalid_argument("missing " + std::string(flag) + " (required by method " + method + ")");
  }
}

void require_positive(const std::optional<double>& v, const char* flag) {
  if (v && !(*v > 0.0 && std::isfinite(*v))) {
    throw std::invalid_argument(std::string(flag) + " must be a positive finite number");
  }
}

NcmSpec make_ncm(const MethodConfig& config, int k_nn) {
  if (config.ncm == "kde") return KdeNcm{*config.bandwidth};
  return KnnNcm{k_nn};
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"njw", "local_scale", "cnn",   "np",    "snn",
                                                 "csnn", "pg",         "cpsc", "cpsca", "hybrid"};
  return names;
}

void validate_method(const MethodConfig& c) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), c.method) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown --method '" + c.method + "' (expected one of " + list + ")");
  }
  require_positive(c.sigma, "--sigma");
  require_positive(c.gamma, "--gamma");
  require_positive(c.bandwidth, "--bandwidth");
  if (c.epsilon && !(*c.epsilon >= 0.0 && std::isfinite(*c.epsilon))) {
    throw std::invalid_argument("--epsilon must be a finite number >= 0");
  }
  if (c.k_nn && *c.k_nn < 1) throw std::invalid_argument("--k-nn must be >= 1");
  if (c.deterministic_tau && !(*c.deterministic_tau > 0.0 && *c.deterministic_tau <= 1.0)) {
    throw std::invalid_argument("--deterministic-tau must lie in (0, 1]");
  }
  if (c.ncm != "knn" && c.ncm != "kde") {
    throw std::invalid_argument("--ncm must be knn or kde (got '" + c.ncm + "')");
  }
  if (c.tune && c.method != "cpsca" && c.method != "hybrid") {
    throw std::invalid_argument("tuning is available for methods cpsca and hybrid only");
  }

  const std::string& m = c.method;
  if (m == "njw") {
    require(c.sigma.has_value(), "--sigma", m);
  } else if (m == "local_scale" || m == "snn" || m == "csnn") {
    require(c.k_nn.has_value(), "--k-nn", m);
  } else if (m == "cnn") {
    require(c.sigma.has_value(), "--sigma", m);
    require(c.k_nn.has_value(), "--k-nn", m);
  } else if (m == "np") {
    require(c.sigma.has_value(), "--sigma", m);
    require(c.epsilon.has_value(), "--epsilon", m);
  } else if (m == "pg") {
    require(c.gamma.has_value(), "--gamma", m);
  } else {
    if (c.ncm == "kde") require(c.bandwidth.has_value(), "--bandwidth", m + " with --ncm kde");
    if (!c.tune) {
      require(c.epsilon.has_value(), "--epsilon", m);
      if (c.ncm == "knn") require(c.k_nn.has_value(), "--k-nn", m + " with --ncm knn");
    }
  }
}

Dataset apply_normalization(const Dataset& data, const std::string& mode) {
  if (mode == "minmax") return normalize_minmax(data);
  if (mode == "zscore") return normalize_zscore(data);
  if (mode == "none") return data;
  throw std::invalid_argument("--normalize must be minmax, zscore or none (got '" + mode + "')");
}

MethodRun run_method(const Dataset& data, const DistanceMatrix& dm, const MethodConfig& config,
                     int k_clusters, std::uint64_t seed, bool keep_affinity, int jobs) {
  validate_method(config);
  const std::string& m = config.method;
  MethodRun run;
  run.parameters = nlohmann::json::object();
  run.parameters["method"] = m;

  if (config.tune) {
    TuneOptions options;
    options.variant = m == "hybrid" ? ConformalVariant::hybrid : ConformalVariant::cpsca;
    options.ncm = make_ncm(config, 1);
    options.deterministic_tau = config.deterministic_tau;
    options.hybrid_sigma = config.sigma;
    options.epsilons = config.grid_epsilon;
    options.k_values = config.grid_k;
    options.seed = seed;
    options.jobs = jobs;
    TuneReport report = tune_cpsc(data, k_clusters, options);
    if (!report.found) throw NumericalError("every tuning grid cell failed");
    run.parameters["tuned"] = true;
    run.parameters["ncm"] = config.ncm;
    run.parameters["epsilon"] = report.best_epsilon;
    run.parameters["k_nn"] = report.best_k_nn;
    if (config.ncm == "kde") run.parameters["bandwidth"] = *config.bandwidth;
    if (m == "hybrid") {
      run.parameters["sigma"] = config.sigma ? *config.sigma : default_hybrid_sigma(dm, report.best_k_nn);
    }
    run.parameters["tune_silhouette"] = report.best_silhouette;
    run.result = report.best;
    run.tune = std::move(report);
    return run;
  }

  const TauMode tau = config.deterministic_tau ? TauMode{FixedTau{*config.deterministic_tau}}
                                               : TauMode{SmoothedTau{derive_seed(seed, {1})}};
  const std::uint64_t kmeans_seed = derive_seed(seed, {2});
  const int k_nn = config.k_nn.value_or(1);

  AffinityMatrix affinity;
  Eigen::MatrixXd cluster_on;
  if (m == "njw") {
    affinity = gaussian_affinity(dm, *config.sigma);
  } else if (m == "local_scale") {
    affinity = local_scale_affinity(dm, k_nn);
  } else if (m == "cnn") {
    run.graph = build_knn_graph(dm, k_nn);
    affinity = cnn_affinity(dm, *config.sigma, *run.graph);
  } else if (m == "np") {
    affinity = np_affinity(dm, *config.sigma, *config.epsilon);
  } else if (m == "snn" || m == "csnn") {
    run.graph = build_knn_graph(dm, k_nn);
    affinity = m == "snn" ? snn_affinity(*run.graph, k_nn) : csnn_affinity(*run.graph, k_nn);
  } else if (m == "pg") {
    affinity = pg_affinity(dm, *config.gamma);
  } else {
    run.graph = build_epsilon_graph(dm, *config.epsilon);
    const NcmSpec ncm = make_ncm(config, k_nn);
    if (m == "cpsc") {
      affinity = cpsc_asymmetric(data, dm, *run.graph, ncm, tau);
      cluster_on = symmetrize_mean(affinity.values);
    } else if (m == "cpsca") {
      affinity = cpsca_symmetric(data, dm, *run.graph, ncm, tau);
    } else {
      const double sigma = config.sigma ? *config.sigma : default_hybrid_sigma(dm, k_nn);
      run.parameters["sigma"] = sigma;
      affinity = hybrid_affinity(data, dm, *run.graph, ncm, tau, sigma);
    }
  }

  auto record = [&run](const char* key, const std::optional<double>& value) {
    if (value && !run.parameters.contains(key)) run.parameters[key] = *value;
  };
  record("sigma", config.sigma);
  record("epsilon", config.epsilon);
  record("gamma", config.gamma);
  record("bandwidth", config.bandwidth);
  if (config.k_nn) run.parameters["k_nn"] = *config.k_nn;
  if (is_conformal(m)) {
    run.parameters["ncm"] = config.ncm;
    if (config.deterministic_tau) run.parameters["deterministic_tau"] = *config.deterministic_tau;
  }
  run.parameters["builder"] = affinity.builder;

  run.result = cluster_on.size() > 0 ? spectral_cluster(cluster_on, k_clusters, kmeans_seed)
                                     : spectral_cluster(affinity, k_clusters, kmeans_seed);
  if (keep_affinity) run.affinity = std::move(affinity);
  return run;
}

nlohmann::json evaluate(const Dataset& data, const DistanceMatrix& dm, const std::vector<int>& labels) {
  nlohmann::json metrics = {{"ari", nullptr}, {"nmi", nullptr}, {"ce", nullptr}, {"silhouette", nullptr}};
  if (data.labels && labels.size() >= 2) {
    metrics["ari"] = ari(*data.labels, labels);
    metrics["nmi"] = nmi(*data.labels, labels);
    metrics["ce"] = clustering_error(*data.labels, labels);
  }
  if (labels.size() >= 3 && count_clusters(labels) >= 2) metrics["silhouette"] = silhouette(dm, labels);
  return metrics;
}

}  // namespace cpsc::cli
