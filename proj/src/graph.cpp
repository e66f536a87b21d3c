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

#include "gnd/graph.hpp"

#include <cmath>
#include <queue>
#include <string>

#include "gnd/errors.hpp"

namespace gnd {

void Graph::validate() const {
  if (adjacency.n_rows() != n_vertices || adjacency.n_cols() != n_vertices) {
    throw Error(ErrorKind::kInconsistentVertexCount,
                "adjacency is " + std::to_string(adjacency.n_rows()) + "x" +
                    std::to_string(adjacency.n_cols()) + " for " +
                    std::to_string(n_vertices) + " vertices");
  }
  if (features.rows() != n_vertices) {
    throw Error(ErrorKind::kInconsistentVertexCount,
                "feature matrix has " + std::to_string(features.rows()) + " rows for " +
                    std::to_string(n_vertices) + " vertices");
  }
  if (labels.size() != n_vertices) {
    throw Error(ErrorKind::kInconsistentVertexCount,
                std::to_string(labels.size()) + " labels for " + std::to_string(n_vertices) +
                    " vertices");
  }
  for (std::size_t i = 0; i < n_vertices; ++i) {
    if (adjacency.at(i, i) != 0.0) {
      throw Error(ErrorKind::kInvalidParameter,
                  "adjacency has a self-loop at vertex " + std::to_string(i));
    }
    if (labels[i] != kUnlabeled && (labels[i] < 0 || labels[i] >= n_classes)) {
      throw Error(ErrorKind::kUnknownLabel,
                  "vertex " + std::to_string(i) + " has label " + std::to_string(labels[i]));
    }
  }
  if (!adjacency.is_symmetric()) {
    throw Error(ErrorKind::kInvalidParameter, "adjacency is not symmetric");
  }
  if (!features.all_finite()) {
    throw Error(ErrorKind::kNonFiniteValue, "feature matrix has non-finite entries");
  }
}

Graph Graph::from_edges(std::size_t n_vertices,
                        const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<Triplet> triplets;
  triplets.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    triplets.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), 1.0});
    triplets.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u), 1.0});
  }
  // Sum duplicates, then flatten every stored weight back to 1.
  auto summed = SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(triplets));
  std::vector<double> ones(summed.nnz(), 1.0);
  Graph g;
  g.n_vertices = n_vertices;
  g.adjacency = SparseMatrix(
      n_vertices, n_vertices,
      std::vector<std::size_t>(summed.row_ptr().begin(), summed.row_ptr().end()),
      std::vector<std::uint32_t>(summed.col_idx().begin(), summed.col_idx().end()),
      std::move(ones));
  g.features = DenseMatrix(n_vertices, 0);
  g.labels.assign(n_vertices, kUnlabeled);
  return g;
}

SparseMatrix add_self_loops(const SparseMatrix& adjacency) {
  const std::size_t n = adjacency.n_rows();
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  cols.reserve(adjacency.nnz() + n);
  vals.reserve(adjacency.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    auto rc = adjacency.row_cols(r);
    auto rv = adjacency.row_values(r);
    bool placed = false;
    for (std::size_t p = 0; p < rc.size(); ++p) {
      if (!placed && rc[p] >= r) {
        if (rc[p] == r) {
          throw Error(ErrorKind::kInvalidParameter,
                      "adjacency already has a self-loop at vertex " + std::to_string(r));
        }
        cols.push_back(static_cast<std::uint32_t>(r));
        vals.push_back(1.0);
        placed = true;
      }
      cols.push_back(rc[p]);
      vals.push_back(rv[p]);
    }
    if (!placed) {
      cols.push_back(static_cast<std::uint32_t>(r));
      vals.push_back(1.0);
    }
    row_ptr[r + 1] = cols.size();
  }
  return SparseMatrix(n, adjacency.n_cols(), std::move(row_ptr), std::move(cols),
                      std::move(vals));
}

SparseMatrix add_self_loops(const Graph& g) { return add_self_loops(g.adjacency); }

namespace {

std::vector<double> row_degrees(const SparseMatrix& a_tilde) {
  std::vector<double> degree(a_tilde.n_rows(), 0.0);
  for (std::size_t r = 0; r < a_tilde.n_rows(); ++r) {
    for (double v : a_tilde.row_values(r)) degree[r] += v;
    if (a_tilde.row_values(r).empty() || degree[r] <= 0.0) {
      throw Error(ErrorKind::kZeroDegreeRow,
                  "row " + std::to_string(r) + " has no weight (self-loops missing?)");
    }
  }
  return degree;
}

}  // namespace

SparseMatrix transition_matrix(const SparseMatrix& a_tilde) {
  const auto degree = row_degrees(a_tilde);
  std::vector<double> vals(a_tilde.values().begin(), a_tilde.values().end());
  for (std::size_t r = 0; r < a_tilde.n_rows(); ++r)
    for (std::size_t p = a_tilde.row_ptr()[r]; p < a_tilde.row_ptr()[r + 1]; ++p)
      vals[p] /= degree[r];
  return SparseMatrix(a_tilde.n_rows(), a_tilde.n_cols(),
                      {a_tilde.row_ptr().begin(), a_tilde.row_ptr().end()},
                      {a_tilde.col_idx().begin(), a_tilde.col_idx().end()}, std::move(vals));
}

SparseMatrix renormalized_smoothing(const SparseMatrix& a_tilde) {
  const auto degree = row_degrees(a_tilde);
  std::vector<double> vals(a_tilde.values().begin(), a_tilde.values().end());
  const auto cols = a_tilde.col_idx();
  for (std::size_t r = 0; r < a_tilde.n_rows(); ++r)
    for (std::size_t p = a_tilde.row_ptr()[r]; p < a_tilde.row_ptr()[r + 1]; ++p)
      vals[p] /= std::sqrt(degree[r] * degree[cols[p]]);
  return SparseMatrix(a_tilde.n_rows(), a_tilde.n_cols(),
                      {a_tilde.row_ptr().begin(), a_tilde.row_ptr().end()},
                      {cols.begin(), cols.end()}, std::move(vals));
}

HopSequence hop_sequence(const SparseMatrix& w, const DenseMatrix& z, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::kInvalidParameter, "hop_sequence needs k >= 1");
  if (w.n_rows() != w.n_cols() || w.n_cols() != z.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "hop_sequence: operator " + std::to_string(w.n_rows()) + "x" +
                    std::to_string(w.n_cols()) + " vs signal with " +
                    std::to_string(z.rows()) + " rows");
  }
  HopSequence seq;
  seq.hops.reserve(k);
  seq.hops.push_back(z);
  for (std::size_t i = 1; i < k; ++i) seq.hops.push_back(spmm(w, seq.hops.back()));
  return seq;
}

Connectivity check_nonbipartite_connected(const SparseMatrix& adjacency) {
  const std::size_t n = adjacency.n_rows();
  Connectivity out{true, true};
  if (n == 0) return out;
  std::vector<int> colour(n, -1);
  std::size_t components = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (colour[start] != -1) continue;
    ++components;
    colour[start] = 0;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (auto v : adjacency.row_cols(u)) {
        if (colour[v] == -1) {
          colour[v] = 1 - colour[u];
          frontier.push(v);
        } else if (colour[v] == colour[u]) {
          out.bipartite = false;  // odd cycle, or a self-loop when v == u
        }
      }
    }
  }
  out.connected = components == 1;
  return out;
}

Connectivity check_nonbipartite_connected(const Graph& g) {
  return check_nonbipartite_connected(g.adjacency);
}

}  // namespace gnd
