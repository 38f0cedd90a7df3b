#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tiledwt/error.hpp"

namespace tiledwt {

using Signal = std::vector<double>;

// Row-major grayscale matrix. Intensities are conventionally 0..255 on
// ingestion but the transform stores arbitrary real coefficients here too.
class Image {
 public:
  Image() = default;

  Image(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw Error(ErrorCode::InvalidArgument, "image must have at least one pixel");
    }
  }

  Image(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
      throw Error(ErrorCode::InvalidArgument, "image must have at least one pixel");
    }
    if (data_.size() != rows * cols) {
      throw Error(ErrorCode::LengthMismatch,
                  "data length " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  // Nested initializer, handy for small literal matrices.
  Image(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
      throw Error(ErrorCode::InvalidArgument, "image must have at least one pixel");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorCode::LengthMismatch, "ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_string(const Image& img) {
  return std::to_string(img.rows()) + "x" + std::to_string(img.cols());
}

inline double sum_of_squares(const Image& img) {
  double s = 0.0;
  for (double v : img.data()) s += v * v;
  return s;
}

inline double max_abs_difference(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::DimensionMismatch, shape_string(a) + " vs " + shape_string(b));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace tiledwt
