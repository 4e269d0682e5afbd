#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cpsc {

/// Fixed seed used by the CLI and the acceptance suite when none is given.
inline constexpr std::uint64_t kDefaultSeed = 20200806;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a path of
/// integer coordinates (cell index, point pair, restart number, ...).
/// The result depends on the order of the path elements.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Maps 64 random bits to a double in (0, 1].
double unit_open_closed(std::uint64_t bits);

/// Maps 64 random bits to a double in [0, 1).
double unit_closed_open(std::uint64_t bits);

// Thin wrapper over mt19937_64. The distribution helpers are written out here
// because the standard distributions are implementation-defined, and results
// must not change between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return unit_closed_open(engine_()); }
  double uniform_positive() { return unit_open_closed(engine_()); }
  std::size_t uniform_index(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace cpsc
