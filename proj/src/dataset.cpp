#include "grabit/dataset.hpp"

#include <fmt/format.h>

#include "grabit/error.hpp"

namespace grabit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "matrix data size does not match its shape");
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  require(values.size() == cols_, "appended row has the wrong width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Dataset::validate() const {
  if (response.size() != features.rows()) {
    fail(ErrorKind::kSchema, fmt::format("{} responses for {} feature rows", response.size(), features.rows()));
  }
  if (!timestamps.empty() && timestamps.size() != features.rows()) {
    fail(ErrorKind::kSchema, "timestamp column does not match the number of rows");
  }
  if (!feature_names.empty() && feature_names.size() != features.cols()) {
    fail(ErrorKind::kSchema, "feature names do not match the number of columns");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features.select_rows(rows);
  out.response.reserve(rows.size());
  for (std::size_t r : rows) out.response.push_back(response[r]);
  if (!timestamps.empty()) {
    for (std::size_t r : rows) out.timestamps.push_back(timestamps[r]);
  }
  out.feature_names = feature_names;
  return out;
}

}  // namespace grabit
