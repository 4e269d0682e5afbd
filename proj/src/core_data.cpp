#include "cpsc/core_data.hpp"

#include "cpsc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace cpsc {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double diff = a[t] - b[t];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

void Dataset::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw DataError("dataset must contain at least one point and one feature");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (!std::isfinite(points(i, j))) {
        throw DataError("non-finite value at point " + std::to_string(i) + ", feature " +
                        std::to_string(j));
      }
    }
  }
  if (labels) {
    if (labels->size() != size()) {
      throw DataError("label count " + std::to_string(labels->size()) +
                      " does not match point count " + std::to_string(size()));
    }
    for (int l : *labels) {
      if (l < 0) throw DataError("labels must be non-negative");
    }
  }
  if (!names.empty() && names.size() != dims()) {
    throw DataError("feature name count does not match feature count");
  }
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string_view t = s.substr(b, e - b);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return std::string(t);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  std::string_view v = cell;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  if (v.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
  return value;
}

std::optional<long> parse_integer(const std::string& s) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::optional<std::string>& label_column,
                  const std::string& source_name) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DataError(source_name + ": file contains no rows");

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw DataError(source_name + ": row " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(rows[r].size()) + " columns, expected " +
                      std::to_string(width));
    }
  }

  std::optional<std::size_t> label_index;
  std::optional<std::string> label_name;
  if (label_column) {
    if (auto idx = parse_integer(*label_column)) {
      const long w = static_cast<long>(width);
      const long resolved = *idx < 0 ? w + *idx : *idx;
      if (resolved < 0 || resolved >= w) {
        throw DataError(source_name + ": label column index " + *label_column +
                        " out of range for " + std::to_string(width) + " columns");
      }
      label_index = static_cast<std::size_t>(resolved);
    } else {
      label_name = *label_column;
    }
  }

  bool has_header = false;
  for (std::size_t c = 0; c < width; ++c) {
    if (label_index && c == *label_index) continue;
    if (!parse_number(rows.front()[c])) has_header = true;
  }
  if (label_name) {
    if (!has_header) {
      throw DataError(source_name + ": label column '" + *label_name +
                      "' requested but the file has no header row");
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (rows.front()[c] == *label_name) label_index = c;
    }
    if (!label_index) {
      throw DataError(source_name + ": label column '" + *label_name + "' not found in header");
    }
  }

  const std::size_t first_data = has_header ? 1 : 0;
  const std::size_t n = rows.size() - first_data;
  const std::size_t d = width - (label_index ? 1 : 0);
  if (n == 0) throw DataError(source_name + ": file has a header but no data rows");
  if (d == 0) throw DataError(source_name + ": no feature columns");

  Dataset data;
  data.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (has_header) {
    for (std::size_t c = 0; c < width; ++c) {
      if (label_index && c == *label_index) continue;
      data.names.push_back(rows.front()[c]);
    }
  }

  std::vector<int> labels;
  std::unordered_map<std::string, int> label_ids;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[first_data + r];
    Eigen::Index out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_index && c == *label_index) {
        auto [it, inserted] = label_ids.try_emplace(row[c], static_cast<int>(label_ids.size()));
        labels.push_back(it->second);
        continue;
      }
      const auto value = parse_number(row[c]);
      if (!value) {
        throw DataError(source_name + ": row " + std::to_string(line_numbers[first_data + r]) +
                        ", column " + std::to_string(c + 1) + ": cannot parse '" + row[c] +
                        "' as a number");
      }
      if (!std::isfinite(*value)) {
        throw DataError(source_name + ": row " + std::to_string(line_numbers[first_data + r]) +
                        ", column " + std::to_string(c + 1) + ": non-finite value");
      }
      data.points(static_cast<Eigen::Index>(r), out_col++) = *value;
    }
  }
  if (label_index) data.labels = std::move(labels);
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, label_column, path.string());
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << std::setprecision(17);
  if (!data.names.empty()) {
    for (std::size_t c = 0; c < data.names.size(); ++c) {
      out << (c ? "," : "") << data.names[c];
    }
    if (data.labels) out << ",label";
    out << '\n';
  }
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
      out << (j ? "," : "") << data.points(i, j);
    }
    if (data.labels) out << ',' << (*data.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(data, out);
}

Dataset normalize_minmax(const Dataset& data) {
  Dataset out = data;
  for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
    const double lo = data.points.col(j).minCoeff();
    const double hi = data.points.col(j).maxCoeff();
    const double range = hi - lo;
    for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
      out.points(i, j) = range > 0.0 ? (data.points(i, j) - lo) / range : 0.0;
    }
  }
  return out;
}

Dataset normalize_zscore(const Dataset& data) {
  Dataset out = data;
  const double n = static_cast<double>(data.points.rows());
  for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
    const double mean = data.points.col(j).sum() / n;
    const double var = (data.points.col(j).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
      out.points(i, j) = sd > 0.0 ? (data.points(i, j) - mean) / sd : 0.0;
    }
  }
  return out;
}

DistanceMatrix pairwise_distances(const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  DistanceMatrix dm;
  dm.dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(row_span(data.points, i), row_span(data.points, j));
      dm.dist(i, j) = d;
      dm.dist(j, i) = d;
      if (d > dm.max_dist) dm.max_dist = d;
    }
  }
  return dm;
}

}  // namespace cpsc
