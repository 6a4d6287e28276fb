// Copyright 2026 The fairobd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small dense vector/matrix helpers. Instances here are tiny (N, M around
// ten), so plain std::vector storage beats pulling in a linear algebra
// package.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fairobd/error.hpp"

namespace fairobd {

using Vec = std::vector<double>;
using ConstVecView = std::span<const double>;

inline double dot(ConstVecView a, ConstVecView b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstVecView a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(ConstVecView a, ConstVecView b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(ConstVecView a, ConstVecView b) {
  return std::sqrt(squared_distance(a, b));
}

// l_p norm for p in [1, inf]; p = +inf selects the max norm.
inline double norm_p(ConstVecView a, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
  }
  if (p == 2.0) return norm2(a);
  // Scale by the max entry so large p does not overflow.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a) s += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

inline Vec operator+(ConstVecView a, ConstVecView b) {
  assert(a.size() == b.size());
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec operator-(ConstVecView a, ConstVecView b) {
  assert(a.size() == b.size());
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(ConstVecView a, double s) {
  Vec r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

// y += alpha * x
inline void axpy(double alpha, ConstVecView x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(ConstVecView a) {
  return std::all_of(a.begin(), a.end(),
                     [](double v) { return std::isfinite(v); });
}

inline double max_abs_diff(ConstVecView a, ConstVecView b) {
  assert(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Row-major dense matrix.
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

  static Matrix diagonal(ConstVecView d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  // Builds from nested rows; every row must have the same length.
  static Matrix from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw ShapeError("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  Vec apply(ConstVecView x) const {
    assert(x.size() == cols_);
    Vec y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) y[r] = dot(row(r), x);
    return y;
  }

  // A^T y
  Vec apply_transpose(ConstVecView y) const {
    assert(y.size() == rows_);
    Vec x(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) axpy(y[r], row(r), x);
    return x;
  }

  double frobenius_squared() const { return dot(data_, data_); }

  Matrix scaled(double s) const {
    Matrix m = *this;
    for (double& v : m.data_) v *= s;
    return m;
  }

  bool is_finite() const { return all_finite(data_); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fairobd
