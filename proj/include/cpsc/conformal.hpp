#pragma once

#include "cpsc/core_data.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace cpsc {

/// kNN non-conformity: sum of the k smallest distances to the set.
struct KnnNcm {
  int k_nn = 1;
};

/// Gaussian KDE non-conformity with bandwidth h; more negative = denser.
struct KdeNcm {
  double bandwidth = 1.0;
};

using NcmSpec = std::variant<KnnNcm, KdeNcm>;

/// Throws std::invalid_argument if k_nn < 1 or the bandwidth is not a
/// positive finite number.
void validate_ncm(const NcmSpec& ncm);

/// Tie-breaking noise drawn uniformly from (0, 1].
struct SmoothedTau {
  std::uint64_t seed = 0;
};

/// Fixed tie weight in (0, 1]; exists for tests and reproducible debugging.
struct FixedTau {
  double tau = 1.0;
};

using TauMode = std::variant<SmoothedTau, FixedTau>;

void validate_tau(const TauMode& mode);

/// Counter-based source of tau values. A stream is identified by the mode's
/// seed plus a caller-chosen key, so concurrent callers can each derive their
/// own stream (e.g. keyed by a point pair) and stay reproducible.
class TauStream {
 public:
  TauStream(const TauMode& mode, std::uint64_t key);
  double next();

 private:
  bool fixed_;
  double fixed_tau_ = 1.0;
  std::uint64_t state_ = 0;
};

/// Sum of the min(k_nn, |S|) smallest distances from z to rows of S.
/// Throws std::invalid_argument for empty S or k_nn < 1.
double knn_ncm(std::span<const double> z, const PointMatrix& set, int k_nn);

/// -(1 / (|S| h^d)) * sum_j K(||z - s_j|| / h) with K(u) = exp(-u^2/2) / (2 pi).
/// Throws std::invalid_argument for empty S or h <= 0.
double kde_ncm(std::span<const double> z, const PointMatrix& set, double h);

double ncm_score(std::span<const double> z, const PointMatrix& set, const NcmSpec& ncm);

/// alpha_k = NC(z_k, D \ {z_k}) for every row of D (|D| >= 2).
std::vector<double> leave_one_out_scores(const PointMatrix& points, const NcmSpec& ncm);

/// (#{k: alpha_k > alpha_last} + #{k: alpha_k == alpha_last} * tau) / n,
/// where the last entry of `alphas` is the score of the new point. Scores are
/// compared exactly.
double conformal_p_value(std::span<const double> alphas, double tau);

/// Smoothed conformal p-value of z against S0: z is appended to S0, every
/// member is scored against the rest, and z's rank gives the p-value, which
/// always lies in (0, 1]. Throws std::invalid_argument for empty S0.
double p_value(std::span<const double> z, const PointMatrix& s0, const NcmSpec& ncm, double tau);
double p_value(std::span<const double> z, const PointMatrix& s0, const NcmSpec& ncm,
               TauStream& tau);

namespace detail {

/// Partially sorts `values` and returns the ascending-order sum of its
/// min(k, size) smallest entries. Every kNN score is produced this way.
double sum_smallest(std::vector<double>& values, std::size_t k);

/// Exact accumulator for non-negative doubles. The represented sum is exact,
/// so value() depends only on the multiset of added terms, never on their
/// order. KDE kernel sums use it so that the same leave-one-out score comes
/// out bit-identical however the members were enumerated.
class ExactSum {
 public:
  void add(double x);
  void add(const ExactSum& other);
  double value() const;

 private:
  static constexpr int kLimbBits = 32;
  static constexpr int kBias = 1074;  // bit 0 holds 2^-1074
  static constexpr std::size_t kLimbs = 40;
  void normalize() const;

  mutable std::array<std::uint64_t, kLimbs> limbs_{};
  mutable std::uint32_t pending_ = 0;
};

/// One Gaussian kernel term K(dist / h).
double kernel_term(double dist, double h);

/// Turns a kernel sum over `count` members into the KDE score.
double kde_score(double kernel_sum, std::size_t count, double h, std::size_t dims);

}  // namespace detail

}  // namespace cpsc
