// Copyright 2026 The gndnet Authors
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

#include "gnd/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnd/errors.hpp"

namespace gnd {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols,
                           std::vector<std::size_t> row_ptr,
                           std::vector<std::uint32_t> col_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_rows_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != values_.size() || col_idx_.size() != values_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "malformed CSR offsets");
  }
  for (std::size_t r = 0; r < n_rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) {
      throw Error(ErrorKind::kDimensionMismatch, "row_ptr decreases at row " + std::to_string(r));
    }
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      if (col_idx_[p] >= n_cols_ || (p > row_ptr_[r] && col_idx_[p] <= col_idx_[p - 1])) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "column indices not strictly increasing in row " + std::to_string(r));
      }
      if (values_[p] == 0.0) {
        throw Error(ErrorKind::kInvalidParameter,
                    "explicit zero stored in row " + std::to_string(r));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                      ") outside " + std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<std::size_t> row_ptr(n_rows + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());

  std::size_t i = 0;
  while (i < triplets.size()) {
    const auto row = triplets[i].row;
    const auto col = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i) {
      sum += triplets[i].value;
    }
    if (sum == 0.0) continue;
    cols.push_back(col);
    vals.push_back(sum);
    ++row_ptr[row + 1];
  }
  for (std::size_t r = 0; r < n_rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return SparseMatrix(n_rows, n_cols, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::uint32_t> cols(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<std::uint32_t>(i);
  return SparseMatrix(n, n, std::move(row_ptr), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < dense.rows(); ++i)
    for (std::size_t j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0)
        triplets.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                            dense(i, j)});
  return from_triplets(dense.rows(), dense.cols(), std::move(triplets));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<std::size_t> row_ptr(n_cols_ + 1, 0);
  for (auto c : col_idx_) ++row_ptr[c + 1];
  for (std::size_t c = 0; c < n_cols_; ++c) row_ptr[c + 1] += row_ptr[c];
  std::vector<std::uint32_t> cols(nnz());
  std::vector<double> vals(nnz());
  std::vector<std::size_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
  // Visiting source rows in order keeps each output row sorted.
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto dst = cursor[col_idx_[p]]++;
      cols[dst] = static_cast<std::uint32_t>(r);
      vals[dst] = values_[p];
    }
  }
  return SparseMatrix(n_cols_, n_rows_, std::move(row_ptr), std::move(cols), std::move(vals));
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out(n_rows_, n_cols_);
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) out(r, col_idx_[p]) = values_[p];
  return out;
}

bool SparseMatrix::is_symmetric(double tolerance) const {
  if (n_rows_ != n_cols_) return false;
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto c = col_idx_[p];
      auto mirror = row_cols(c);
      if (!std::binary_search(mirror.begin(), mirror.end(), static_cast<std::uint32_t>(r)))
        return false;
      if (std::abs(at(c, r) - values_[p]) > tolerance) return false;
    }
  }
  return true;
}

DenseMatrix spmm(const SparseMatrix& m, const DenseMatrix& dense) {
  if (m.n_cols() != dense.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "spmm: sparse has " + std::to_string(m.n_cols()) + " columns, dense has " +
                    std::to_string(dense.rows()) + " rows");
  }
  const std::size_t width = dense.cols();
  DenseMatrix out(m.n_rows(), width);
  const auto row_ptr = m.row_ptr();
  const auto cols = m.col_idx();
  const auto vals = m.values();
  const double* src = dense.data().data();
  double* dst = out.data().data();
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    double* __restrict out_row = dst + r * width;
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const double v = vals[p];
      const double* __restrict in_row = src + cols[p] * width;
      for (std::size_t j = 0; j < width; ++j) out_row[j] += v * in_row[j];
    }
  }
  return out;
}

DenseMatrix spmm_transposed(const SparseMatrix& m, const DenseMatrix& dense) {
  if (m.n_rows() != dense.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "spmm_transposed: sparse has " + std::to_string(m.n_rows()) +
                    " rows, dense has " + std::to_string(dense.rows()));
  }
  const std::size_t width = dense.cols();
  DenseMatrix out(m.n_cols(), width);
  const auto row_ptr = m.row_ptr();
  const auto cols = m.col_idx();
  const auto vals = m.values();
  const double* src = dense.data().data();
  double* dst = out.data().data();
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    const double* __restrict in_row = src + r * width;
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const double v = vals[p];
      double* __restrict out_row = dst + cols[p] * width;
      for (std::size_t j = 0; j < width; ++j) out_row[j] += v * in_row[j];
    }
  }
  return out;
}

}  // namespace gnd
