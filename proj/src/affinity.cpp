#include "cpsc/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cpsc {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be a positive finite number");
  }
}

std::string tag(const std::string& name,
                std::initializer_list<std::pair<const char*, double>> params) {
  std::ostringstream out;
  out << name << '(';
  bool first = true;
  for (const auto& [key, value] : params) {
    out << (first ? "" : ",") << key << '=' << value;
    first = false;
  }
  out << ')';
  return out.str();
}

std::string ncm_tag(const NcmSpec& ncm) {
  if (const auto* knn = std::get_if<KnnNcm>(&ncm)) {
    return "knn_ncm(k_nn=" + std::to_string(knn->k_nn) + ")";
  }
  std::ostringstream out;
  out << "kde_ncm(h=" << std::get<KdeNcm>(ncm).bandwidth << ")";
  return out.str();
}

std::string graph_tag(const NeighborhoodGraph& g) {
  std::ostringstream out;
  if (g.kind() == GraphKind::epsilon) {
    out << "epsilon_graph(epsilon=" << g.epsilon() << ")";
  } else {
    out << "knn_graph(k_nn=" << g.k_nn() << ")";
  }
  return out.str();
}

double gaussian_entry(double d, double sigma) {
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

void require_knn_graph(const NeighborhoodGraph& g, int k_nn) {
  if (g.kind() != GraphKind::knn) {
    throw std::invalid_argument("shared-neighbour affinities need a directed kNN graph");
  }
  if (g.k_nn() != k_nn) {
    throw std::invalid_argument("graph was built with k_nn=" + std::to_string(g.k_nn()) +
                                ", affinity asked for k_nn=" + std::to_string(k_nn));
  }
}

// Sorted copies of every adjacency list, for fast intersections.
std::vector<std::vector<std::size_t>> sorted_adjacency(const NeighborhoodGraph& g) {
  std::vector<std::vector<std::size_t>> lists(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    lists[i] = g.neighbors(i);
    std::sort(lists[i].begin(), lists[i].end());
  }
  return lists;
}

std::size_t intersection_size(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                              std::size_t skip1, std::size_t skip2) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      if (*ia != skip1 && *ia != skip2) ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

AffinityMatrix gaussian_affinity(const DistanceMatrix& dm, double sigma) {
  require_positive(sigma, "sigma");
  const auto n = static_cast<Eigen::Index>(dm.size());
  AffinityMatrix a{Eigen::MatrixXd::Zero(n, n), tag("gaussian", {{"sigma", sigma}}), true, {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) a.values(i, j) = gaussian_entry(dm.dist(i, j), sigma);
    }
  }
  return a;
}

AffinityMatrix local_scale_affinity(const DistanceMatrix& dm, int k_nn) {
  const std::size_t n = dm.size();
  if (n < 2) throw std::invalid_argument("local-scale affinity needs at least two points");
  if (k_nn < 1) throw std::invalid_argument("k_nn must be >= 1");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_nn), n - 1);

  std::vector<double> scale(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dm(i, j));
    }
    scale[i] = detail::sum_smallest(row, k) / static_cast<double>(k);
  }
  double smallest_positive = std::numeric_limits<double>::infinity();
  for (double s : scale) {
    if (s > 0.0) smallest_positive = std::min(smallest_positive, s);
  }
  const double fallback = std::isfinite(smallest_positive) ? smallest_positive : 1.0;
  for (double& s : scale) {
    if (s == 0.0) s = fallback;
  }

  const auto ni = static_cast<Eigen::Index>(n);
  AffinityMatrix a{Eigen::MatrixXd::Zero(ni, ni),
                   tag("local_scale", {{"k_nn", static_cast<double>(k_nn)}}), true, {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = dm(i, j);
      a.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(-(d * d) / (scale[i] * scale[j]));
    }
  }
  return a;
}

AffinityMatrix cnn_affinity(const DistanceMatrix& dm, double sigma, const NeighborhoodGraph& graph) {
  require_positive(sigma, "sigma");
  const std::size_t n = dm.size();
  if (graph.size() != n) {
    throw std::invalid_argument("graph has " + std::to_string(graph.size()) +
                                " nodes but the distance matrix has " + std::to_string(n));
  }
  const auto lists = sorted_adjacency(graph);
  const auto ni = static_cast<Eigen::Index>(n);
  AffinityMatrix a{Eigen::MatrixXd::Zero(ni, ni), tag("cnn", {{"sigma", sigma}}) + "@" + graph_tag(graph), true, {}};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const auto shared = static_cast<double>(intersection_size(lists[k], lists[l], k, l));
      const double d = dm(k, l);
      const double v = std::exp(-(d * d) / (2.0 * sigma * sigma * (shared + 1.0)));
      a.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
      a.values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return a;
}

AffinityMatrix np_affinity(const DistanceMatrix& dm, double sigma, double epsilon) {
  require_positive(sigma, "sigma");
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be finite and >= 0");
  }
  AffinityMatrix a = gaussian_affinity(dm, sigma);
  a.builder = tag("np", {{"sigma", sigma}, {"epsilon", epsilon}});
  const auto n = static_cast<Eigen::Index>(dm.size());

  std::vector<char> linked(static_cast<std::size_t>(n * n), 0);
  auto at = [n](Eigen::Index i, Eigen::Index j) { return static_cast<std::size_t>(i * n + j); };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && dm.dist(i, j) < epsilon) linked[at(i, j)] = 1;
    }
  }

  struct NewLink {
    Eigen::Index i;
    Eigen::Index k;
    double value;
  };
  std::vector<NewLink> fresh;
  while (true) {
    fresh.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = i + 1; k < n; ++k) {
        if (linked[at(i, k)]) continue;
        double best = -1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (linked[at(i, j)] && linked[at(j, k)]) {
            best = std::max(best, std::min(a.values(i, j), a.values(j, k)));
          }
        }
        if (best >= 0.0) fresh.push_back({i, k, best});
      }
    }
    if (fresh.empty()) break;
    for (const auto& link : fresh) {
      linked[at(link.i, link.k)] = 1;
      linked[at(link.k, link.i)] = 1;
      a.values(link.i, link.k) = link.value;
      a.values(link.k, link.i) = link.value;
    }
  }
  return a;
}

AffinityMatrix snn_affinity(const NeighborhoodGraph& graph, int k_nn) {
  require_knn_graph(graph, k_nn);
  const std::size_t n = graph.size();
  const auto lists = sorted_adjacency(graph);
  const auto ni = static_cast<Eigen::Index>(n);
  AffinityMatrix a{Eigen::MatrixXd::Zero(ni, ni), tag("snn", {{"k_nn", static_cast<double>(k_nn)}}), true, {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = static_cast<double>(intersection_size(lists[i], lists[j], i, j)) /
                       static_cast<double>(k_nn);
      a.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      a.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return a;
}

AffinityMatrix csnn_affinity(const NeighborhoodGraph& graph, int k_nn) {
  require_knn_graph(graph, k_nn);
  const std::size_t n = graph.size();
  // rank[i][r] = 1-based position of r in N_i, 0 if absent.
  std::vector<std::vector<int>> rank(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& adj = graph.neighbors(i);
    for (std::size_t p = 0; p < adj.size(); ++p) rank[i][adj[p]] = static_cast<int>(p) + 1;
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(ni, ni);
  double max_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t r : graph.neighbors(i)) {
        if (r == j || rank[j][r] == 0) continue;
        sum += static_cast<double>(k_nn - rank[i][r] + 1) * static_cast<double>(k_nn - rank[j][r] + 1);
      }
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = sum;
      max_w = std::max(max_w, sum);
    }
  }
  AffinityMatrix a{Eigen::MatrixXd::Zero(ni, ni), tag("csnn", {{"k_nn", static_cast<double>(k_nn)}}), true, {}};
  if (max_w == 0.0) {
    a.warnings.push_back("csnn: no pair shares a neighbour; affinity is all zero");
    return a;
  }
  a.values = w / max_w;
  return a;
}

AffinityMatrix pg_affinity(const DistanceMatrix& dm, double gamma) {
  require_positive(gamma, "gamma");
  const std::size_t n = dm.size();
  if (n < 2) throw std::invalid_argument("powered Gaussian affinity needs at least two points");
  double beta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, dm(i, j));
    }
    beta = std::max(beta, nearest);
  }
  if (beta == 0.0) beta = 1.0;
  const auto ni = static_cast<Eigen::Index>(n);
  AffinityMatrix a{Eigen::MatrixXd::Zero(ni, ni), tag("pg", {{"gamma", gamma}, {"beta", beta}}), true, {}};
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      if (i == j) continue;
      const double d = dm.dist(i, j);
      a.values(i, j) = std::pow(std::exp(-(d * d) / beta), gamma);
    }
  }
  return a;
}

double conformal_pair_tau(const TauMode& mode, std::size_t i, std::size_t j) {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  TauStream stream(mode, (lo << 32) ^ hi);
  const double first = stream.next();
  return i < j ? first : stream.next();
}

namespace {

// Everything about one neighbourhood Nbd(z_j) that does not depend on the
// point z_i being tested against it.
struct KnnNeighbourhood {
  std::size_t m = 0;
  std::size_t kept = 0;                // sorted distances kept per member
  std::vector<double> sorted;          // m x kept, ascending per member
  std::vector<double> prefix;          // m x (kept + 1) running sums

  const double* row(std::size_t a) const { return sorted.data() + a * kept; }
  const double* sums(std::size_t a) const { return prefix.data() + a * (kept + 1); }
};

// kNN score of member a once an outside point at distance d joins the set:
// the ascending-order sum of the k smallest of {member's distances} ∪ {d},
// reproducing detail::sum_smallest bit for bit.
double knn_score_with_extra(const KnnNeighbourhood& nb, std::size_t a, double d, std::size_t k) {
  const double* b = nb.row(a);
  const double* pre = nb.sums(a);
  const std::size_t others = nb.m - 1;
  std::size_t limit = 0;  // number of base distances that precede the merged tail
  if (k > others) {
    limit = others;
  } else {
    if (d >= b[k - 1]) return pre[k];
    limit = k - 1;
  }
  const std::size_t p = static_cast<std::size_t>(std::lower_bound(b, b + limit, d) - b);
  double sum = pre[p] + d;
  for (std::size_t t = p; t < limit; ++t) sum += b[t];
  return sum;
}

double rank_p_value(std::size_t greater, std::size_t equal, double tau, std::size_t n) {
  return (static_cast<double>(greater) + static_cast<double>(equal) * tau) / static_cast<double>(n);
}

}  // namespace

std::vector<Eigen::MatrixXd> cpsc_asymmetric_batch(const Dataset& data, const DistanceMatrix& dm,
                                                   const NeighborhoodGraph& graph,
                                                   std::span<const ConformalRequest> requests) {
  const std::size_t n = data.size();
  if (graph.size() != n || dm.size() != n) {
    throw std::invalid_argument("graph, distance matrix and dataset sizes differ");
  }
  std::vector<std::size_t> knn_req;
  std::vector<std::size_t> kde_req;
  std::size_t k_max = 0;
  for (std::size_t t = 0; t < requests.size(); ++t) {
    validate_ncm(requests[t].ncm);
    validate_tau(requests[t].tau);
    if (const auto* knn = std::get_if<KnnNcm>(&requests[t].ncm)) {
      knn_req.push_back(t);
      k_max = std::max(k_max, static_cast<std::size_t>(knn->k_nn));
    } else {
      kde_req.push_back(t);
    }
  }

  const auto ni = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> out(requests.size(), Eigen::MatrixXd::Zero(ni, ni));
  std::vector<std::ptrdiff_t> slot(n, -1);
  std::vector<double> scratch;
  std::vector<double> to_members;
  std::vector<double> own_sorted;
  std::vector<double> own_prefix;
  std::vector<std::vector<double>> loo(requests.size());
  std::vector<std::vector<double>> loo_sorted_by_req(requests.size());
  std::vector<std::vector<detail::ExactSum>> kde_bases(requests.size());
  std::vector<double> alphas;

  for (std::size_t j = 0; j < n; ++j) {
    const auto& members = graph.neighbors(j);
    const std::size_t m = members.size();
    if (m == 0) continue;
    for (std::size_t a = 0; a < m; ++a) slot[members[a]] = static_cast<std::ptrdiff_t>(a);

    KnnNeighbourhood nb;
    nb.m = m;
    if (!knn_req.empty()) {
      nb.kept = std::min(k_max, m - 1);
      nb.sorted.resize(m * nb.kept);
      nb.prefix.resize(m * (nb.kept + 1));
      for (std::size_t a = 0; a < m; ++a) {
        scratch.clear();
        for (std::size_t b = 0; b < m; ++b) {
          if (b != a) scratch.push_back(dm(members[a], members[b]));
        }
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(nb.kept),
                          scratch.end());
        double* row = nb.sorted.data() + a * nb.kept;
        double* pre = nb.prefix.data() + a * (nb.kept + 1);
        pre[0] = 0.0;
        for (std::size_t t = 0; t < nb.kept; ++t) {
          row[t] = scratch[t];
          pre[t + 1] = pre[t] + scratch[t];
        }
      }
      for (std::size_t r : knn_req) {
        const auto k = static_cast<std::size_t>(std::get<KnnNcm>(requests[r].ncm).k_nn);
        loo[r].assign(m, 0.0);
        if (m >= 2) {
          for (std::size_t a = 0; a < m; ++a) loo[r][a] = nb.sums(a)[std::min(k, m - 1)];
        }
        loo_sorted_by_req[r] = loo[r];
        std::sort(loo_sorted_by_req[r].begin(), loo_sorted_by_req[r].end());
      }
    }

    // Exact kernel sums of each member against the other members.
    for (std::size_t r : kde_req) {
      const double h = std::get<KdeNcm>(requests[r].ncm).bandwidth;
      auto& bases = kde_bases[r];
      bases.assign(m, detail::ExactSum{});
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          const double term = detail::kernel_term(dm(members[a], members[b]), h);
          bases[a].add(term);
          bases[b].add(term);
        }
      }
      loo[r].assign(m, 0.0);
      if (m >= 2) {
        for (std::size_t a = 0; a < m; ++a) {
          loo[r][a] = detail::kde_score(bases[a].value(), m - 1, h, data.dims());
        }
      }
      loo_sorted_by_req[r] = loo[r];
      std::sort(loo_sorted_by_req[r].begin(), loo_sorted_by_req[r].end());
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);

      if (slot[i] >= 0) {
        // z_i is already a member: the extended set is Nbd(z_j) itself.
        if (m < 2) continue;
        const auto a = static_cast<std::size_t>(slot[i]);
        for (std::size_t r = 0; r < requests.size(); ++r) {
          const double own = loo[r][a];
          const auto& sorted = loo_sorted_by_req[r];
          const auto range = std::equal_range(sorted.begin(), sorted.end(), own);
          const auto greater = static_cast<std::size_t>(sorted.end() - range.second);
          const auto equal = static_cast<std::size_t>(range.second - range.first);
          out[r](ii, jj) = rank_p_value(greater, equal, conformal_pair_tau(requests[r].tau, i, j), m);
        }
        continue;
      }

      // z_i joins from outside: m + 1 scores.
      to_members.resize(m);
      for (std::size_t a = 0; a < m; ++a) to_members[a] = dm(i, members[a]);

      if (!knn_req.empty()) {
        const std::size_t kept_own = std::min(k_max, m);
        own_sorted = to_members;
        std::partial_sort(own_sorted.begin(), own_sorted.begin() + static_cast<std::ptrdiff_t>(kept_own),
                          own_sorted.end());
        own_prefix.assign(kept_own + 1, 0.0);
        for (std::size_t t = 0; t < kept_own; ++t) own_prefix[t + 1] = own_prefix[t] + own_sorted[t];

        for (std::size_t r : knn_req) {
          const auto k = static_cast<std::size_t>(std::get<KnnNcm>(requests[r].ncm).k_nn);
          const double own = own_prefix[std::min(k, m)];
          std::size_t greater = 0;
          std::size_t equal = 1;
          for (std::size_t a = 0; a < m; ++a) {
            const double alpha = knn_score_with_extra(nb, a, to_members[a], k);
            if (alpha > own) {
              ++greater;
            } else if (alpha == own) {
              ++equal;
            }
          }
          out[r](ii, jj) = rank_p_value(greater, equal, conformal_pair_tau(requests[r].tau, i, j), m + 1);
        }
      }

      for (std::size_t r : kde_req) {
        const double h = std::get<KdeNcm>(requests[r].ncm).bandwidth;
        detail::ExactSum own_sum;
        std::size_t greater = 0;
        std::size_t equal = 1;
        alphas.resize(m);
        for (std::size_t a = 0; a < m; ++a) {
          const double term = detail::kernel_term(to_members[a], h);
          own_sum.add(term);
          detail::ExactSum with_new = kde_bases[r][a];
          with_new.add(term);
          alphas[a] = detail::kde_score(with_new.value(), m, h, data.dims());
        }
        const double own = detail::kde_score(own_sum.value(), m, h, data.dims());
        for (double alpha : alphas) {
          if (alpha > own) {
            ++greater;
          } else if (alpha == own) {
            ++equal;
          }
        }
        out[r](ii, jj) = rank_p_value(greater, equal, conformal_pair_tau(requests[r].tau, i, j), m + 1);
      }
    }

    for (std::size_t member : members) slot[member] = -1;
  }
  return out;
}

AffinityMatrix cpsc_asymmetric(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau) {
  const ConformalRequest request{ncm, tau};
  auto matrices = cpsc_asymmetric_batch(data, dm, graph, std::span(&request, 1));
  return {std::move(matrices.front()), "cpsc(" + ncm_tag(ncm) + ")@" + graph_tag(graph), false, {}};
}

AffinityMatrix cpsc_asymmetric(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau) {
  return cpsc_asymmetric(data, pairwise_distances(data), graph, ncm, tau);
}

Eigen::MatrixXd symmetrize_mean(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = (m(i, j) + m(j, i)) / 2.0;
  }
  return out;
}

AffinityMatrix cpsca_symmetric(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau) {
  AffinityMatrix directed = cpsc_asymmetric(data, dm, graph, ncm, tau);
  return {symmetrize_mean(directed.values), "cpsca(" + ncm_tag(ncm) + ")@" + graph_tag(graph), true, {}};
}

AffinityMatrix cpsca_symmetric(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau) {
  return cpsca_symmetric(data, pairwise_distances(data), graph, ncm, tau);
}

Eigen::MatrixXd add_gaussian_term(const Eigen::MatrixXd& conformal, const DistanceMatrix& dm,
                                  double sigma) {
  require_positive(sigma, "sigma");
  const Eigen::Index n = conformal.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out(i, j) = conformal(i, j) + gaussian_entry(dm.dist(i, j), sigma);
    }
  }
  return out;
}

AffinityMatrix hybrid_affinity(const Dataset& data, const DistanceMatrix& dm,
                               const NeighborhoodGraph& graph, const NcmSpec& ncm,
                               const TauMode& tau, double sigma) {
  require_positive(sigma, "sigma");
  AffinityMatrix mean = cpsca_symmetric(data, dm, graph, ncm, tau);
  std::ostringstream name;
  name << "hybrid(" << ncm_tag(ncm) << ",sigma=" << sigma << ")@" << graph_tag(graph);
  return {add_gaussian_term(mean.values, dm, sigma), name.str(), true, {}};
}

AffinityMatrix hybrid_affinity(const Dataset& data, const NeighborhoodGraph& graph,
                               const NcmSpec& ncm, const TauMode& tau, double sigma) {
  return hybrid_affinity(data, pairwise_distances(data), graph, ncm, tau, sigma);
}

double default_hybrid_sigma(const DistanceMatrix& dm, int k_nn) {
  const std::size_t n = dm.size();
  if (n < 2) return 1.0;
  if (k_nn < 1) throw std::invalid_argument("k_nn must be >= 1");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_nn), n - 1);
  std::vector<double> row;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dm(i, j));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    total += row[k - 1];
  }
  const double mean = total / static_cast<double>(n);
  return mean > 0.0 ? mean : 1.0;
}

void write_affinity_csv(const AffinityMatrix& a, std::ostream& out) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.values.cols(); ++j) {
      out << (j ? "," : "") << a.values(i, j);
    }
    out << '\n';
  }
}

}  // namespace cpsc
