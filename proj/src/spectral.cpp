#include "cpsc/spectral.hpp"

#include "cpsc/error.hpp"
#include "cpsc/random.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cpsc {

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
  const Eigen::Index n = affinity.rows();
  if (affinity.cols() != n) throw std::invalid_argument("affinity matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(affinity(i, j) - affinity(j, i)) > 1e-12) {
        throw std::invalid_argument("affinity matrix is not symmetric at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      }
    }
  }
  Eigen::VectorXd inv_sqrt_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double degree = affinity.row(i).sum();
    inv_sqrt_degree(i) = 1.0 / std::sqrt(degree > 0.0 ? degree : 1.0);
  }
  Eigen::MatrixXd laplacian(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = affinity(i, j) * inv_sqrt_degree(i) * inv_sqrt_degree(j);
      laplacian(i, j) = v;
      laplacian(j, i) = v;
    }
  }
  return laplacian;
}

SpectralEmbedding top_k_eigenvectors(const Eigen::MatrixXd& symmetric, int k) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("matrix must be square");
  if (k < 1 || k > n) {
    throw std::invalid_argument("k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  Eigen::MatrixXd work = symmetric;
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<Eigen::Index>(k, 1)));
  lapack_int found = 0;
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', ln, work.data(), ln, 0.0,
                                         0.0, ln - k + 1, ln, 0.0, &found, values.data(),
                                         vectors.data(), ln, support.data());
  if (info != 0 || found != k) {
    throw NumericalError("symmetric eigensolver failed (info=" + std::to_string(info) + ")");
  }

  SpectralEmbedding emb;
  emb.eigenvalues.resize(k);
  emb.vectors.resize(n, k);
  for (int c = 0; c < k; ++c) {
    // LAPACK returns ascending order.
    const int src = k - 1 - c;
    emb.eigenvalues(c) = values(src);
    Eigen::VectorXd v = vectors.col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    emb.vectors.col(c) = v;
  }
  emb.normalized = row_normalize(emb.vectors);
  return emb;
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double norm = y.row(i).norm();
    if (norm > 0.0) y.row(i) /= norm;
  }
  return y;
}

namespace {

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
  double sum = 0.0;
  for (Eigen::Index t = 0; t < points.cols(); ++t) {
    const double diff = points(i, t) - centers(c, t);
    sum += diff * diff;
  }
  return sum;
}

Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centers, c - 1));
      total += d;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = nearest[static_cast<std::size_t>(i)];
        if (d <= 0.0) continue;
        running += d;
        pick = i;
        if (running > target) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
    }
    centers.row(c) = points.row(pick);
  }
  return centers;
}

struct LloydRun {
  std::vector<int> labels;
  double distortion = 0.0;
};

double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, std::vector<int>& labels,
              std::vector<double>& own_distance) {
  double distortion = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(points, i, centers, 0);
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    own_distance[static_cast<std::size_t>(i)] = best_d;
    distortion += best_d;
  }
  return distortion;
}

LloydRun lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centers.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<double> own(static_cast<std::size_t>(n), 0.0);
  [[maybe_unused]] double previous = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double distortion = assign(points, centers, labels, own);
    assert(distortion <= previous + 1e-12 * std::max(1.0, previous) &&
           "k-means distortion increased");
    previous = distortion;

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = labels[static_cast<std::size_t>(i)];
      updated.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        updated.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || own[static_cast<std::size_t>(i)] > own[static_cast<std::size_t>(far)]) far = i;
      }
      if (far < 0) far = 0;
      taken[static_cast<std::size_t>(far)] = 1;
      updated.row(c) = points.row(far);
    }

    double movement = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      movement = std::max(movement, (updated.row(c) - centers.row(c)).norm());
    }
    centers = std::move(updated);
    if (movement < options.tolerance) break;
  }

  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), 0);
  run.distortion = assign(points, centers, run.labels, own);
  return run;
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels, int k) {
  std::vector<int> map(static_cast<std::size_t>(k), -1);
  int next = 0;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& id = map[static_cast<std::size_t>(labels[i])];
    if (id < 0) id = next++;
    out[i] = id;
  }
  return out;
}

}  // namespace

ClusteringResult kmeans(const Eigen::MatrixXd& points, int k_clusters, std::uint64_t seed,
                        const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  if (k_clusters < 1) throw std::invalid_argument("k_clusters must be >= 1");
  if (k_clusters > n) {
    throw std::invalid_argument("k_clusters=" + std::to_string(k_clusters) + " exceeds point count " +
                                std::to_string(n));
  }
  if (options.restarts < 1) throw std::invalid_argument("k-means needs at least one restart");

  ClusteringResult best;
  best.distortion = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    LloydRun run = lloyd(points, seed_centers(points, k_clusters, rng), options);
    if (run.distortion < best.distortion) {
      best.distortion = run.distortion;
      best.labels = std::move(run.labels);
    }
  }
  best.labels = relabel_by_first_appearance(best.labels, k_clusters);
  best.k_clusters = k_clusters;
  best.seed = seed;
  best.restarts = options.restarts;
  return best;
}

ClusteringResult spectral_cluster(const Eigen::MatrixXd& affinity, int k_clusters, std::uint64_t seed,
                                  const KMeansOptions& options) {
  const Eigen::MatrixXd laplacian = normalized_laplacian(affinity);
  if (k_clusters < 1 || k_clusters > laplacian.rows()) {
    throw std::invalid_argument("k_clusters=" + std::to_string(k_clusters) + " outside [1, " +
                                std::to_string(laplacian.rows()) + "]");
  }
  SpectralEmbedding emb = top_k_eigenvectors(laplacian, k_clusters);
  ClusteringResult result = kmeans(emb.normalized, k_clusters, seed, options);
  result.eigenvalues = std::move(emb.eigenvalues);
  return result;
}

ClusteringResult spectral_cluster(const AffinityMatrix& affinity, int k_clusters, std::uint64_t seed,
                                  const KMeansOptions& options) {
  if (!affinity.symmetric) {
    throw std::invalid_argument("spectral clustering needs a symmetric affinity (got " +
                                affinity.builder + ")");
  }
  return spectral_cluster(affinity.values, k_clusters, seed, options);
}

}  // namespace cpsc
