#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "liangyi/errors.hpp"
#include "liangyi/solver/config.hpp"
#include "liangyi/tsp/instance.hpp"

namespace liangyi {

using AlgorithmId = std::uint64_t;

// A portfolio member: configuration plus the bookkeeping the coevolution
// needs (stable id, cycle in which it joined the population).
struct Member {
  AlgorithmId id = 0;
  SolverConfig config;
  int birth_cycle = 1;

  friend bool operator==(const Member&, const Member&) = default;
};

// Arithmetic mean; the aggregate used for applicability.
struct MeanAggregate {
  double operator()(std::span<const double> values) const {
    if (values.empty()) throw StructuralError("aggregate over an empty instance set");
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
  }
};

// Rows are algorithms, columns instances; entries are per-pair performance
// values where larger is better.
class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  PerformanceMatrix(std::vector<AlgorithmId> rows, std::vector<InstanceId> cols)
      : rows_(std::move(rows)), cols_(std::move(cols)), data_(rows_.size() * cols_.size(), 0.0) {}
  PerformanceMatrix(std::vector<AlgorithmId> rows, std::vector<InstanceId> cols,
                    std::vector<double> data)
      : rows_(std::move(rows)), cols_(std::move(cols)), data_(std::move(data)) {
    if (data_.size() != rows_.size() * cols_.size())
      throw StructuralError("performance matrix: data size does not match dimensions");
  }

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return cols_.size(); }
  const std::vector<AlgorithmId>& row_ids() const { return rows_; }
  const std::vector<InstanceId>& col_ids() const { return cols_; }

  double at(std::size_t r, std::size_t c) const { return data_[r * cols_.size() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_.size() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_.size(), cols_.size()};
  }

  std::size_t row_index(AlgorithmId id) const {
    auto it = std::find(rows_.begin(), rows_.end(), id);
    if (it == rows_.end())
      throw StructuralError("performance matrix: no row for algorithm " + std::to_string(id));
    return static_cast<std::size_t>(it - rows_.begin());
  }

  // Sub-matrix of the given rows (in the given order), all columns.
  PerformanceMatrix select_rows(std::span<const std::size_t> picks) const {
    std::vector<AlgorithmId> ids;
    std::vector<double> data;
    data.reserve(picks.size() * cols_.size());
    for (std::size_t r : picks) {
      if (r >= rows_.size()) throw StructuralError("performance matrix: row index out of range");
      ids.push_back(rows_[r]);
      auto values = row(r);
      data.insert(data.end(), values.begin(), values.end());
    }
    return PerformanceMatrix(std::move(ids), cols_, std::move(data));
  }

  PerformanceMatrix select_cols(std::span<const std::size_t> picks) const {
    std::vector<InstanceId> ids;
    for (std::size_t c : picks) {
      if (c >= cols_.size()) throw StructuralError("performance matrix: column index out of range");
      ids.push_back(cols_[c]);
    }
    PerformanceMatrix out(rows_, std::move(ids));
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (std::size_t k = 0; k < picks.size(); ++k) out.at(r, k) = at(r, picks[k]);
    return out;
  }

  PerformanceMatrix without_row(std::size_t r) const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (i != r) keep.push_back(i);
    return select_rows(keep);
  }

  // Per-column maximum over all rows (portfolio performance per instance).
  std::vector<double> column_max() const {
    if (rows_.empty()) throw StructuralError("performance matrix: column max of an empty portfolio");
    std::vector<double> best(row(0).begin(), row(0).end());
    for (std::size_t r = 1; r < rows_.size(); ++r) {
      auto values = row(r);
      for (std::size_t c = 0; c < best.size(); ++c) best[c] = std::max(best[c], values[c]);
    }
    return best;
  }

  // CSV with header "algorithm,<instance ids...>", one line per row.
  std::string to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "algorithm";
    for (InstanceId c : cols_) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      out << rows_[r];
      for (double v : row(r)) out << ',' << v;
      out << '\n';
    }
    return out.str();
  }

  static PerformanceMatrix from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) return {};
    auto split = [](const std::string& s) {
      std::vector<std::string> parts;
      std::string cur;
      for (char ch : s) {
        if (ch == ',') {
          parts.push_back(cur);
          cur.clear();
        } else {
          cur += ch;
        }
      }
      parts.push_back(cur);
      return parts;
    };
    auto header = split(line);
    if (header.empty() || header[0] != "algorithm")
      throw ParseError("matrix csv: header must start with 'algorithm'");
    std::vector<InstanceId> cols;
    for (std::size_t i = 1; i < header.size(); ++i) cols.push_back(std::stoull(header[i]));
    std::vector<AlgorithmId> rows;
    std::vector<double> data;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto parts = split(line);
      if (parts.size() != cols.size() + 1) throw ParseError("matrix csv: ragged row");
      rows.push_back(std::stoull(parts[0]));
      for (std::size_t i = 1; i < parts.size(); ++i) data.push_back(std::stod(parts[i]));
    }
    return PerformanceMatrix(std::move(rows), std::move(cols), std::move(data));
  }

  friend bool operator==(const PerformanceMatrix&, const PerformanceMatrix&) = default;

 private:
  std::vector<AlgorithmId> rows_;
  std::vector<InstanceId> cols_;
  std::vector<double> data_;
};

// Vertical concatenation: same columns, rows of `bottom` appended.
inline PerformanceMatrix concat_rows(const PerformanceMatrix& top, const PerformanceMatrix& bottom) {
  if (bottom.num_rows() == 0) return top;
  if (top.num_rows() == 0) return bottom;
  if (top.col_ids() != bottom.col_ids())
    throw StructuralError("concat_rows: column ids differ");
  std::vector<AlgorithmId> rows = top.row_ids();
  rows.insert(rows.end(), bottom.row_ids().begin(), bottom.row_ids().end());
  std::vector<double> data;
  data.reserve(rows.size() * top.num_cols());
  for (std::size_t r = 0; r < top.num_rows(); ++r)
    data.insert(data.end(), top.row(r).begin(), top.row(r).end());
  for (std::size_t r = 0; r < bottom.num_rows(); ++r)
    data.insert(data.end(), bottom.row(r).begin(), bottom.row(r).end());
  return PerformanceMatrix(std::move(rows), top.col_ids(), std::move(data));
}

// Horizontal concatenation: same rows, columns of `right` appended.
inline PerformanceMatrix concat_cols(const PerformanceMatrix& left, const PerformanceMatrix& right) {
  if (right.num_cols() == 0) return left;
  if (left.num_cols() == 0) return right;
  if (left.row_ids() != right.row_ids()) throw StructuralError("concat_cols: row ids differ");
  std::vector<InstanceId> cols = left.col_ids();
  cols.insert(cols.end(), right.col_ids().begin(), right.col_ids().end());
  PerformanceMatrix out(left.row_ids(), std::move(cols));
  for (std::size_t r = 0; r < left.num_rows(); ++r) {
    for (std::size_t c = 0; c < left.num_cols(); ++c) out.at(r, c) = left.at(r, c);
    for (std::size_t c = 0; c < right.num_cols(); ++c)
      out.at(r, left.num_cols() + c) = right.at(r, c);
  }
  return out;
}

// P(AP, IP) read off a matrix whose rows are exactly the portfolio.
template <typename Aggr = MeanAggregate>
double portfolio_performance(const PerformanceMatrix& m, Aggr aggr = {}) {
  const auto best = m.column_max();
  return aggr(best);
}

}  // namespace liangyi
