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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gnd/dense_matrix.hpp"

namespace gnd {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Compressed sparse row matrix.
//
// Invariants (checked on construction):
//  * row_ptr has n_rows + 1 non-decreasing offsets starting at 0 and ending at
//    the number of stored entries;
//  * column indices inside a row are strictly increasing and < n_cols;
//  * no stored value is exactly zero.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
               std::vector<std::uint32_t> col_idx, std::vector<double> values);

  // Builds from unordered triplets. Duplicates are summed; entries that end
  // up exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const DenseMatrix& dense);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::uint32_t> row_cols(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  // Stored value at (r, c) or 0.
  double at(std::size_t r, std::size_t c) const;

  SparseMatrix transposed() const;
  DenseMatrix to_dense() const;
  bool is_symmetric(double tolerance = 0.0) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

// m * dense. Each output row is accumulated sequentially in column order.
DenseMatrix spmm(const SparseMatrix& m, const DenseMatrix& dense);
// m^T * dense, without materializing the transpose.
DenseMatrix spmm_transposed(const SparseMatrix& m, const DenseMatrix& dense);

}  // namespace gnd
