#include "cpsc/fixtures.hpp"

#include "cpsc/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpsc {

Dataset make_blobs(std::uint64_t seed, int per_blob, double spread) {
  if (per_blob < 1) throw std::invalid_argument("per_blob must be >= 1");
  if (!(spread >= 0.0)) throw std::invalid_argument("spread must be >= 0");
  Rng rng(seed);
  Dataset data;
  data.points.resize(2 * per_blob, 2);
  data.labels.emplace();
  data.names = {"x", "y"};
  for (int b = 0; b < 2; ++b) {
    for (int t = 0; t < per_blob; ++t) {
      const Eigen::Index row = b * per_blob + t;
      data.points(row, 0) = static_cast<double>(b) + spread * rng.normal();
      data.points(row, 1) = spread * rng.normal();
      data.labels->push_back(b);
    }
  }
  return data;
}

Dataset make_moons(std::uint64_t seed, int per_moon, double noise) {
  if (per_moon < 2) throw std::invalid_argument("per_moon must be >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  Rng rng(seed);
  Dataset data;
  data.points.resize(2 * per_moon, 2);
  data.labels.emplace();
  data.names = {"x", "y"};
  for (int m = 0; m < 2; ++m) {
    for (int t = 0; t < per_moon; ++t) {
      const double angle = std::numbers::pi * static_cast<double>(t) / static_cast<double>(per_moon - 1);
      const Eigen::Index row = m * per_moon + t;
      double x = std::cos(angle);
      double y = std::sin(angle);
      if (m == 1) {
        x = 1.0 - x;
        y = 0.5 - y;
      }
      data.points(row, 0) = x + noise * rng.normal();
      data.points(row, 1) = y + noise * rng.normal();
      data.labels->push_back(m);
    }
  }
  return data;
}

}  // namespace cpsc
