#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace grabit {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  /// Rows picked by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> rows) const;

  void append_row(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Features, observed response and optional per-row timestamps (in days).
struct Dataset {
  Matrix features;
  std::vector<double> response;
  std::vector<double> timestamps;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return features.rows(); }
  std::size_t cols() const { return features.cols(); }

  /// Checks that response / timestamps / names line up with the matrix.
  void validate() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
};

}  // namespace grabit
