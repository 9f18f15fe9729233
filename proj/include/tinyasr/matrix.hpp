// tinyasr/matrix.hpp

// Copyright 2026  tinyasr contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYASR_MATRIX_HPP_
#define TINYASR_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tinyasr/common.hpp"

namespace tinyasr {

// Dense row-major matrix of 64-bit floats.  All model arithmetic runs in
// doubles; gradient-check tolerances depend on it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix of(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw UsageError("Matrix::of: ragged rows");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_.data() + r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_.data() + r * cols_, cols_);
  }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void require_finite(const std::string& what) const {
    if (!all_finite())
      throw NumericError("non-finite values in " + what);
  }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y (+)= A x, with A of shape (out x in).
inline void matvec(const Matrix& a, std::span<const double> x,
                   std::span<double> y, bool accumulate = true) {
  if (x.size() != a.cols() || y.size() != a.rows())
    throw UsageError("matvec: shape mismatch");
  const double* ap = a.data();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = accumulate ? y[r] : 0.0;
    const double* arow = ap + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) acc += arow[c] * x[c];
    y[r] = acc;
  }
}

// y (+)= A^T x, with A of shape (out x in); x has length out.
inline void matvec_t(const Matrix& a, std::span<const double> x,
                     std::span<double> y, bool accumulate = true) {
  if (x.size() != a.rows() || y.size() != a.cols())
    throw UsageError("matvec_t: shape mismatch");
  if (!accumulate)
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] = 0.0;
  const double* ap = a.data();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* arow = ap + r * a.cols();
    double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += arow[c] * xr;
  }
}

// A += x y^T (outer-product accumulation into a gradient buffer).
inline void add_outer(Matrix& a, std::span<const double> x,
                      std::span<const double> y) {
  if (x.size() != a.rows() || y.size() != a.cols())
    throw UsageError("add_outer: shape mismatch");
  double* ap = a.data();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    double* arow = ap + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) arow[c] += xr * y[c];
  }
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw UsageError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace tinyasr

#endif  // TINYASR_MATRIX_HPP_
