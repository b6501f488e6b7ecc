#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oedpm/errors.hpp"

namespace oedpm {

using Vector = std::vector<double>;

// Dense row-major matrix. Rows are contiguous so the SIMD kernels can walk
// them directly.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix select_rows(const std::vector<std::size_t>& indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t r = 0; r < indices.size(); ++r) {
      if (indices[r] >= rows_)
        throw UsageError("select_rows: index " + std::to_string(indices[r]) + " out of range");
      const double* src = row(indices[r]);
      std::copy(src, src + cols_, out.row(r));
    }
    return out;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void check_same_cols(const Matrix& a, std::size_t expected, const char* where) {
  if (a.cols() != expected)
    throw UsageError(std::string(where) + ": expected " + std::to_string(expected) +
                     " columns, got " + std::to_string(a.cols()));
}

} // namespace oedpm
