#include "cpsc/conformal.hpp"

#include "cpsc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpsc {

void validate_ncm(const NcmSpec& ncm) {
  if (const auto* knn = std::get_if<KnnNcm>(&ncm)) {
    if (knn->k_nn < 1) throw std::invalid_argument("kNN non-conformity requires k_nn >= 1");
  } else {
    const double h = std::get<KdeNcm>(ncm).bandwidth;
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("KDE non-conformity requires a positive finite bandwidth");
    }
  }
}

void validate_tau(const TauMode& mode) {
  if (const auto* fixed = std::get_if<FixedTau>(&mode)) {
    if (!(fixed->tau > 0.0 && fixed->tau <= 1.0)) {
      throw std::invalid_argument("deterministic tau must lie in (0, 1]");
    }
  }
}

TauStream::TauStream(const TauMode& mode, std::uint64_t key) {
  validate_tau(mode);
  if (const auto* fixed = std::get_if<FixedTau>(&mode)) {
    fixed_ = true;
    fixed_tau_ = fixed->tau;
  } else {
    fixed_ = false;
    state_ = derive_seed(std::get<SmoothedTau>(mode).seed, {key});
  }
}

double TauStream::next() {
  if (fixed_) return fixed_tau_;
  state_ += 0x9e3779b97f4a7c15ULL;
  return unit_open_closed(splitmix64(state_));
}

namespace detail {

__extension__ using WideUnsigned = unsigned __int128;

void ExactSum::add(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("ExactSum accepts finite non-negative terms only");
  }
  if (x == 0.0) return;
  int exponent = 0;
  const double fraction = std::frexp(x, &exponent);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
  int pos = exponent - 53 + kBias;
  if (pos < 0) {
    // Subnormal: the dropped bits are zero because x is a multiple of 2^-1074.
    mantissa >>= -pos;
    pos = 0;
  }
  const auto limb = static_cast<std::size_t>(pos / kLimbBits);
  if (limb + 2 >= kLimbs) throw std::overflow_error("ExactSum term too large");
  const WideUnsigned wide = static_cast<WideUnsigned>(mantissa) << (pos % kLimbBits);
  constexpr std::uint64_t mask = 0xffffffffULL;
  limbs_[limb] += static_cast<std::uint64_t>(wide) & mask;
  limbs_[limb + 1] += static_cast<std::uint64_t>(wide >> 32) & mask;
  limbs_[limb + 2] += static_cast<std::uint64_t>(wide >> 64);
  if (++pending_ >= (1U << 30)) normalize();
}

void ExactSum::add(const ExactSum& other) {
  normalize();
  other.normalize();
  for (std::size_t t = 0; t < kLimbs; ++t) limbs_[t] += other.limbs_[t];
  pending_ = 1;
}

void ExactSum::normalize() const {
  if (pending_ == 0) return;
  for (std::size_t t = 0; t + 1 < kLimbs; ++t) {
    limbs_[t + 1] += limbs_[t] >> kLimbBits;
    limbs_[t] &= 0xffffffffULL;
  }
  pending_ = 0;
}

double ExactSum::value() const {
  normalize();
  std::size_t top = kLimbs;
  while (top > 0 && limbs_[top - 1] == 0) --top;
  if (top == 0) return 0.0;
  double result = 0.0;
  const std::size_t stop = top >= 3 ? top - 3 : 0;
  for (std::size_t t = top; t-- > stop;) {
    result += std::ldexp(static_cast<double>(limbs_[t]),
                         static_cast<int>(t) * kLimbBits - kBias);
  }
  return result;
}

double sum_smallest(std::vector<double>& values, std::size_t k) {
  const std::size_t take = std::min(k, values.size());
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(take),
                    values.end());
  double sum = 0.0;
  for (std::size_t t = 0; t < take; ++t) sum += values[t];
  return sum;
}

double kernel_term(double dist, double h) {
  const double u = dist / h;
  return std::exp(-0.5 * u * u) / (2.0 * std::numbers::pi);
}

double kde_score(double kernel_sum, std::size_t count, double h, std::size_t dims) {
  return -kernel_sum / (static_cast<double>(count) * std::pow(h, static_cast<double>(dims)));
}

}  // namespace detail

namespace {

void require_non_empty(const PointMatrix& set) {
  if (set.rows() == 0) throw std::invalid_argument("non-conformity needs a non-empty set");
}

}  // namespace

double knn_ncm(std::span<const double> z, const PointMatrix& set, int k_nn) {
  require_non_empty(set);
  if (k_nn < 1) throw std::invalid_argument("k_nn must be >= 1");
  std::vector<double> dists(static_cast<std::size_t>(set.rows()));
  for (Eigen::Index j = 0; j < set.rows(); ++j) {
    dists[static_cast<std::size_t>(j)] = euclidean_distance(z, row_span(set, j));
  }
  return detail::sum_smallest(dists, static_cast<std::size_t>(k_nn));
}

double kde_ncm(std::span<const double> z, const PointMatrix& set, double h) {
  require_non_empty(set);
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("bandwidth must be > 0");
  detail::ExactSum sum;
  for (Eigen::Index j = 0; j < set.rows(); ++j) {
    sum.add(detail::kernel_term(euclidean_distance(z, row_span(set, j)), h));
  }
  return detail::kde_score(sum.value(), static_cast<std::size_t>(set.rows()), h, z.size());
}

double ncm_score(std::span<const double> z, const PointMatrix& set, const NcmSpec& ncm) {
  if (const auto* knn = std::get_if<KnnNcm>(&ncm)) return knn_ncm(z, set, knn->k_nn);
  return kde_ncm(z, set, std::get<KdeNcm>(ncm).bandwidth);
}

std::vector<double> leave_one_out_scores(const PointMatrix& points, const NcmSpec& ncm) {
  validate_ncm(ncm);
  const Eigen::Index n = points.rows();
  if (n < 2) throw std::invalid_argument("leave-one-out scoring needs at least two points");
  std::vector<double> alphas(static_cast<std::size_t>(n));
  PointMatrix rest(n - 1, points.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index out = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != k) rest.row(out++) = points.row(r);
    }
    alphas[static_cast<std::size_t>(k)] = ncm_score(row_span(points, k), rest, ncm);
  }
  return alphas;
}

double conformal_p_value(std::span<const double> alphas, double tau) {
  if (alphas.empty()) throw std::invalid_argument("no scores");
  const double own = alphas.back();
  std::size_t greater = 0;
  std::size_t equal = 0;
  for (double a : alphas) {
    if (a > own) {
      ++greater;
    } else if (a == own) {
      ++equal;
    }
  }
  return (static_cast<double>(greater) + static_cast<double>(equal) * tau) /
         static_cast<double>(alphas.size());
}

double p_value(std::span<const double> z, const PointMatrix& s0, const NcmSpec& ncm, double tau) {
  if (s0.rows() == 0) throw std::invalid_argument("p-value needs a non-empty reference set");
  if (static_cast<std::size_t>(s0.cols()) != z.size()) {
    throw std::invalid_argument("point and set dimensions differ");
  }
  validate_tau(FixedTau{tau});
  PointMatrix extended(s0.rows() + 1, s0.cols());
  extended.topRows(s0.rows()) = s0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    extended(s0.rows(), static_cast<Eigen::Index>(t)) = z[t];
  }
  const std::vector<double> alphas = leave_one_out_scores(extended, ncm);
  return conformal_p_value(alphas, tau);
}

double p_value(std::span<const double> z, const PointMatrix& s0, const NcmSpec& ncm,
               TauStream& tau) {
  return p_value(z, s0, ncm, tau.next());
}

}  // namespace cpsc
