/* Copyright 2026 The mddkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mdd/error.hpp"

namespace mdd {

// Dense row-major matrix of scalars. All numeric kernels in this library are
// templated on the scalar type; double is the default everywhere precision
// matters (losses, gradient checks), float instantiations exist for speed.
template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, S value = S(0)) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
      throw InvalidArgument("Matrix dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                 value);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  S& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const S& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  S* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const S* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  std::vector<S>& data() { return data_; }
  const std::vector<S>& data() const { return data_; }

  void fill(S value) { std::fill(data_.begin(), data_.end(), value); }
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<S> data_;
};

namespace detail {

template <class S>
inline void check_same_shape(const Matrix<S>& a, const Matrix<S>& b,
                             const char* what) {
  if (!a.same_shape(b)) throw DimensionError(std::string("shape mismatch in ") + what);
}

}  // namespace detail

// out += scale * a * b
template <class S>
void matmul_acc(Matrix<S>& out, const Matrix<S>& a, const Matrix<S>& b,
                S scale = S(1)) {
  if (a.cols() != b.rows() || out.rows() != a.rows() || out.cols() != b.cols()) {
    throw DimensionError("matmul_acc: incompatible shapes");
  }
  for (int i = 0; i < a.rows(); ++i) {
    S* out_row = out.row(i);
    const S* a_row = a.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const S aik = scale * a_row[k];
      if (aik == S(0)) continue;
      const S* b_row = b.row(k);
      for (int j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
}

template <class S>
Matrix<S> matmul(const Matrix<S>& a, const Matrix<S>& b) {
  Matrix<S> out(a.rows(), b.cols());
  matmul_acc(out, a, b);
  return out;
}

// out += scale * a^T * b
template <class S>
void matmul_tn_acc(Matrix<S>& out, const Matrix<S>& a, const Matrix<S>& b,
                   S scale = S(1)) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("matmul_tn_acc: incompatible shapes");
  }
  for (int k = 0; k < a.rows(); ++k) {
    const S* a_row = a.row(k);
    const S* b_row = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      const S aki = scale * a_row[i];
      if (aki == S(0)) continue;
      S* out_row = out.row(i);
      for (int j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
}

// out += scale * a * b^T
template <class S>
void matmul_nt_acc(Matrix<S>& out, const Matrix<S>& a, const Matrix<S>& b,
                   S scale = S(1)) {
  if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
    throw DimensionError("matmul_nt_acc: incompatible shapes");
  }
  for (int i = 0; i < a.rows(); ++i) {
    const S* a_row = a.row(i);
    S* out_row = out.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const S* b_row = b.row(j);
      S acc = S(0);
      for (int k = 0; k < a.cols(); ++k) acc += a_row[k] * b_row[k];
      out_row[j] += scale * acc;
    }
  }
}

// out += scale * x
template <class S>
void axpy(Matrix<S>& out, S scale, const Matrix<S>& x) {
  detail::check_same_shape(out, x, "axpy");
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] += scale * x.data()[i];
}

// out += a elementwise-times b
template <class S>
void hadamard_acc(Matrix<S>& out, const Matrix<S>& a, const Matrix<S>& b) {
  detail::check_same_shape(a, b, "hadamard_acc");
  detail::check_same_shape(out, a, "hadamard_acc");
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] += a.data()[i] * b.data()[i];
}

// out (1 x cols) += column sums of a
template <class S>
void col_sums_acc(Matrix<S>& out, const Matrix<S>& a) {
  if (out.rows() != 1 || out.cols() != a.cols()) {
    throw DimensionError("col_sums_acc: incompatible shapes");
  }
  for (int i = 0; i < a.rows(); ++i) {
    const S* row = a.row(i);
    for (int j = 0; j < a.cols(); ++j) out(0, j) += row[j];
  }
}

template <class S>
S max_abs(const Matrix<S>& a) {
  S m = S(0);
  for (const S& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

template <class S>
bool all_finite(const Matrix<S>& a) {
  for (const S& v : a.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <class S>
S log_sum_exp(const S* values, int n) {
  S max_val = -std::numeric_limits<S>::infinity();
  for (int i = 0; i < n; ++i) max_val = std::max(max_val, values[i]);
  if (max_val == -std::numeric_limits<S>::infinity()) return max_val;
  S acc = S(0);
  for (int i = 0; i < n; ++i) acc += std::exp(values[i] - max_val);
  return max_val + std::log(acc);
}

template <class S>
S log_sum_exp(S a, S b) {
  if (a == -std::numeric_limits<S>::infinity()) return b;
  if (b == -std::numeric_limits<S>::infinity()) return a;
  return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

// Row-wise log-softmax; rows of the result sum to one in probability space.
template <class S>
Matrix<S> log_softmax_rows(const Matrix<S>& logits) {
  Matrix<S> out(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    const S* in = logits.row(i);
    S* dst = out.row(i);
    const S lse = log_sum_exp(in, logits.cols());
    for (int j = 0; j < logits.cols(); ++j) dst[j] = in[j] - lse;
  }
  return out;
}

template <class S>
Matrix<S> softmax_rows(const Matrix<S>& logits) {
  Matrix<S> out = log_softmax_rows(logits);
  for (S& v : out.data()) v = std::exp(v);
  return out;
}

// True when every row's log-probabilities sum to one within tol.
template <class S>
bool is_log_normalized(const Matrix<S>& lattice, S tol) {
  for (int i = 0; i < lattice.rows(); ++i) {
    if (std::abs(log_sum_exp(lattice.row(i), lattice.cols())) > tol) return false;
  }
  return true;
}

// Default normalization tolerance for the scalar type: 1e-9 in double keeps
// the lattice invariant tight; float rows cannot do better than ~1e-4.
template <class S>
constexpr S lattice_tolerance() {
  return sizeof(S) >= 8 ? S(1e-9) : S(1e-4);
}

}  // namespace mdd
