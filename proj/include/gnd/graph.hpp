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
#include <utility>
#include <vector>

#include "gnd/dense_matrix.hpp"
#include "gnd/sparse_matrix.hpp"

namespace gnd {

inline constexpr int kUnlabeled = -1;

// Undirected attributed graph. The adjacency is symmetric with an empty
// diagonal; self-loops are introduced only by add_self_loops().
struct Graph {
  std::size_t n_vertices = 0;
  SparseMatrix adjacency;
  DenseMatrix features;
  std::vector<int> labels;  // class id in [0, n_classes) or kUnlabeled
  int n_classes = 0;

  // Throws Error if any structural invariant is violated.
  void validate() const;
  // Builds a graph from an undirected edge list (each pair stored both ways,
  // duplicates and self-edges dropped).
  static Graph from_edges(std::size_t n_vertices,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

// A~ = A + I.
SparseMatrix add_self_loops(const Graph& g);
SparseMatrix add_self_loops(const SparseMatrix& adjacency);

// W~ = D~^-1 A~ (row-stochastic). Throws ZeroDegreeRow on an empty row.
SparseMatrix transition_matrix(const SparseMatrix& a_tilde);

// D~^-1/2 A~ D~^-1/2 (symmetric, spectrum inside [-1, 1]).
SparseMatrix renormalized_smoothing(const SparseMatrix& a_tilde);

// [Z, W Z, ..., W^(K-1) Z]; hops.front() is Z itself.
struct HopSequence {
  std::vector<DenseMatrix> hops;
  std::size_t k() const { return hops.size(); }
  const DenseMatrix& operator[](std::size_t i) const { return hops[i]; }
};

// Repeated spmm; W^k is never formed.
HopSequence hop_sequence(const SparseMatrix& w, const DenseMatrix& z, std::size_t k);

struct Connectivity {
  bool connected = false;
  bool bipartite = false;
};

// Inspects the raw adjacency (no self-loops): BFS for connectivity, 2-colouring
// for bipartiteness. Any stored diagonal entry makes the graph non-bipartite.
Connectivity check_nonbipartite_connected(const Graph& g);
Connectivity check_nonbipartite_connected(const SparseMatrix& adjacency);

}  // namespace gnd
