// Copyright 2026 The scrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SCRL_MATRIX_HPP_
#define SCRL_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace scrl {

// Small dense row-major matrix. Sizes here stay in the tens to low hundreds.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const { return data_; }

  Matrix& operator+=(const Matrix& other) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  // this += weight * v v^T
  void add_outer(std::span<const double> v, double weight) {
    for (std::size_t i = 0; i < rows_; ++i) {
      const double wi = weight * v[i];
      if (wi == 0.0) continue;
      double* out = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) out[j] += wi * v[j];
    }
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs_asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        worst = std::fmax(worst, std::fabs((*this)(i, j) - (*this)(j, i)));
    return worst;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// Q^T M Q for a column basis Q.
inline Matrix congruence(const Matrix& m, const Matrix& basis) {
  return basis.transpose() * (m * basis);
}

// Q^T v
inline std::vector<double> project(const Matrix& basis, std::span<const double> v) {
  std::vector<double> out(basis.cols(), 0.0);
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < basis.cols(); ++j) out[j] += basis(i, j) * v[i];
  }
  return out;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace scrl

#endif  // SCRL_MATRIX_HPP_
