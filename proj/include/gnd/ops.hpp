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
#include <span>
#include <vector>

#include "gnd/dense_matrix.hpp"
#include "gnd/rng.hpp"
#include "gnd/sparse_matrix.hpp"
#include "gnd/tape.hpp"

// Differentiable op vocabulary. Every function records one node on the tape
// that owns its inputs and returns the handle of the output.
namespace gnd::ad {

Var matmul(Var a, Var b);
// m * x with m held constant; m must outlive the tape.
Var spmm(const SparseMatrix& m, Var x);
Var add(Var a, Var b);
Var subtract(Var a, Var b);
Var multiply(Var a, Var b);  // elementwise
Var scale(Var a, double factor);
Var sum(Var a);  // 1x1
// sum_k weights(0, k) * terms[k]; weights is 1xK.
Var scale_by_parameter_row(Var weights, std::span<const Var> terms);
Var relu(Var a);
// Vertical stack; all inputs share a column count.
Var concat_rows(std::span<const Var> parts);
// rows x cols -> 1 x (rows*cols), row by row.
Var flatten_rows(Var a);
// 1 x (rows*cols) (or any shape with that many entries) -> rows x cols.
Var unflatten_rows(Var a, std::size_t rows, std::size_t cols);
Var transpose(Var a);
// Inverted dropout. In evaluation mode returns `a` itself.
Var dropout(Var a, double rate, bool training, Rng& rng);
// Mean over `rows` of -log(max(softmax(logits)[i, labels[i]], 1e-12)).
Var masked_softmax_cross_entropy(Var logits, std::span<const int> labels,
                                 std::span<const std::size_t> rows);
// factor * sum ||p||^2.
Var l2_penalty(std::span<const Var> params, double factor);

inline constexpr double kLogClamp = 1e-12;

}  // namespace gnd::ad
