#pragma once

#include "cpsc/core_data.hpp"

#include <cstdint>

namespace cpsc {

/// Two isotropic Gaussian blobs in 2-D centred at (0, 0) and (1, 0), with
/// `per_blob` points each and standard deviation `spread`. Labels 0 and 1.
Dataset make_blobs(std::uint64_t seed, int per_blob = 30, double spread = 0.05);

/// Two interleaved half circles with Gaussian jitter of standard deviation
/// `noise`; `per_moon` points each. Labels 0 (upper) and 1 (lower).
Dataset make_moons(std::uint64_t seed, int per_moon = 100, double noise = 0.05);

}  // namespace cpsc
