#include "cpsc/tuning.hpp"

#include "cpsc/affinity.hpp"
#include "cpsc/error.hpp"
#include "cpsc/format.hpp"
#include "cpsc/metrics.hpp"
#include "cpsc/neighborhood_graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace cpsc {

const char* to_string(CellStatus status) {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::empty_graph: return "empty_graph";
    case CellStatus::degenerate: return "degenerate";
    case CellStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

std::vector<double> default_epsilon_grid(double max_dist) {
  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor(max_dist * 100.0));
  for (long t = 1; t <= steps; ++t) grid.push_back(static_cast<double>(t) / 100.0);
  return grid;
}

std::vector<int> resolve_k_grid(const std::vector<int>& requested, std::size_t n) {
  const int upper = static_cast<int>(std::min<std::size_t>(n > 0 ? n - 1 : 0, 1U << 30));
  std::vector<int> ks;
  if (requested.empty()) {
    for (int k = 1; k <= std::min(30, upper); ++k) ks.push_back(k);
    return ks;
  }
  for (int k : requested) {
    if (k < 1) throw std::invalid_argument("grid k_nn values must be >= 1");
    const int clamped = std::min(k, upper);
    if (clamped >= 1 && std::find(ks.begin(), ks.end(), clamped) == ks.end()) ks.push_back(clamped);
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

namespace {

struct ColumnResult {
  std::vector<TuneCell> cells;
  int best_index = -1;  // into cells
  ClusteringResult best;
};

// Strictly better score, or nothing found yet; the caller visits cells in
// (epsilon, k_nn) order, so keeping the first maximum implements the tie rule.
bool improves(const TuneCell& cell, bool have_best, double best_score) {
  return cell.status == CellStatus::ok && (!have_best || cell.silhouette > best_score);
}

ColumnResult evaluate_column(const Dataset& data, const DistanceMatrix& dm, int k_clusters,
                             const TuneOptions& options, std::size_t eps_index, double epsilon,
                             const std::vector<int>& ks) {
  ColumnResult column;
  const bool kde = std::holds_alternative<KdeNcm>(options.ncm);
  const NeighborhoodGraph graph = build_epsilon_graph(dm, epsilon);

  if (graph.edge_count() == 0) {
    for (int k : ks) column.cells.push_back({epsilon, k, 0.0, CellStatus::empty_graph});
    return column;
  }

  auto tau_for = [&](std::size_t k_index) -> TauMode {
    if (options.deterministic_tau) return FixedTau{*options.deterministic_tau};
    return SmoothedTau{derive_seed(options.seed, {eps_index, k_index, 0})};
  };

  std::vector<ConformalRequest> requests;
  if (kde) {
    requests.push_back({options.ncm, tau_for(0)});
  } else {
    for (std::size_t t = 0; t < ks.size(); ++t) requests.push_back({KnnNcm{ks[t]}, tau_for(t)});
  }
  const std::vector<Eigen::MatrixXd> directed = cpsc_asymmetric_batch(data, dm, graph, requests);

  double best_score = 0.0;
  for (std::size_t t = 0; t < ks.size(); ++t) {
    TuneCell cell{epsilon, ks[t], 0.0, CellStatus::ok};
    ClusteringResult result;
    try {
      Eigen::MatrixXd values = symmetrize_mean(directed[kde ? 0 : t]);
      if (options.variant == ConformalVariant::hybrid) {
        const double sigma = options.hybrid_sigma ? *options.hybrid_sigma : default_hybrid_sigma(dm, ks[t]);
        values = add_gaussian_term(values, dm, sigma);
      }
      result = spectral_cluster(values, k_clusters, derive_seed(options.seed, {eps_index, t, 1}),
                                options.kmeans);
      if (count_clusters(result.labels) < 2) {
        cell.status = CellStatus::degenerate;
      } else {
        cell.silhouette = silhouette(dm, result.labels);
      }
    } catch (const NumericalError&) {
      cell.status = CellStatus::numerical_error;
    }
    if (improves(cell, column.best_index >= 0, best_score)) {
      best_score = cell.silhouette;
      column.best_index = static_cast<int>(column.cells.size());
      column.best = std::move(result);
    }
    column.cells.push_back(cell);
  }
  return column;
}

}  // namespace

TuneReport tune_cpsc(const Dataset& data, int k_clusters, const TuneOptions& options) {
  if (k_clusters < 2) throw std::invalid_argument("tuning needs k_clusters >= 2");
  if (static_cast<std::size_t>(k_clusters) > data.size()) {
    throw std::invalid_argument("k_clusters exceeds the number of points");
  }
  validate_ncm(options.ncm);
  if (options.deterministic_tau) validate_tau(FixedTau{*options.deterministic_tau});
  if (options.hybrid_sigma && !(*options.hybrid_sigma > 0.0)) {
    throw std::invalid_argument("hybrid sigma must be > 0");
  }
  const DistanceMatrix dm = pairwise_distances(data);
  const std::vector<double> epsilons =
      options.epsilons.empty() ? default_epsilon_grid(dm.max_dist) : options.epsilons;
  for (double e : epsilons) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("grid epsilon values must be finite and >= 0");
  }
  std::vector<int> ks = resolve_k_grid(options.k_values, data.size());
  if (std::holds_alternative<KdeNcm>(options.ncm) && options.variant == ConformalVariant::cpsca &&
      !ks.empty()) {
    ks.resize(1);
  }
  if (epsilons.empty() || ks.empty()) throw std::invalid_argument("tuning grid is empty");

  std::vector<ColumnResult> columns(epsilons.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t e = next++; e < epsilons.size(); e = next++) {
      columns[e] = evaluate_column(data, dm, k_clusters, options, e, epsilons[e], ks);
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(epsilons.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  TuneReport report;
  for (ColumnResult& column : columns) {
    if (column.best_index >= 0) {
      const TuneCell& cell = column.cells[static_cast<std::size_t>(column.best_index)];
      if (improves(cell, report.found, report.best_silhouette)) {
        report.found = true;
        report.best_epsilon = cell.epsilon;
        report.best_k_nn = cell.k_nn;
        report.best_silhouette = cell.silhouette;
        report.best = std::move(column.best);
      }
    }
    report.grid.insert(report.grid.end(), column.cells.begin(), column.cells.end());
  }
  return report;
}

void write_grid_csv(const TuneReport& report, std::ostream& out) {
  out << "epsilon,k_nn,silhouette,status\n";
  for (const TuneCell& cell : report.grid) {
    out << format_double(cell.epsilon) << ',' << cell.k_nn << ',';
    if (cell.status == CellStatus::ok) out << format_double(cell.silhouette);
    out << ',' << to_string(cell.status) << '\n';
  }
}

}  // namespace cpsc
