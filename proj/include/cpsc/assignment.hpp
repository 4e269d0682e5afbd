#pragma once

#include <cstdint>
#include <vector>

namespace cpsc {

/// Maximum-weight perfect matching on a rows x cols integer weight matrix
/// (row-major, `weights[r * cols + c]`). Non-square inputs are padded with
/// zero-weight rows or columns. Returns, for each row, the matched column or
/// -1 when the row was matched to a padding column.
std::vector<int> max_weight_assignment(const std::vector<std::int64_t>& weights, int rows, int cols);

}  // namespace cpsc
