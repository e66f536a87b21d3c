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
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "gnd/dense_matrix.hpp"
#include "gnd/graph.hpp"

namespace gnd {

// On-disk dataset:
//   edges    one whitespace-separated pair of 0-based vertex ids per line,
//            '#' starts a comment line;
//   features CSV, row i = vertex i, no header;
//   labels   one integer per line, -1 = unlabeled.
struct DatasetFiles {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;

  // <dir>/edges.txt, <dir>/features.csv, <dir>/labels.txt
  static DatasetFiles in_directory(const std::filesystem::path& dir);
};

// Symmetrises, deduplicates and drops self-edges. Non-negative labels are
// mapped in increasing order onto 0..C-1.
Graph load_dataset(const DatasetFiles& files);
// Writes the three files (features with 17 significant digits).
void save_dataset(const Graph& g, const DatasetFiles& files);

struct SbmConfig {
  std::size_t n_per_class = 500;
  std::size_t n_classes = 3;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t feature_dim = 50;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SbmConfig& c);
SbmConfig sbm_config_from_json(const nlohmann::json& j);

// Vertices of class c occupy ids [c * n_per_class, (c + 1) * n_per_class).
// Features are e_c + N(0, feature_noise^2) per coordinate.
Graph generate_sbm(const SbmConfig& c);

// Writes <dir>/hop_<k>.csv for every hop: a "k=<k>" header line followed by
// one comma-separated row per vertex. Returns the written paths in order.
std::vector<std::filesystem::path> dump_embeddings(const HopSequence& hops,
                                                   const std::filesystem::path& dir);
// Parses one dump file; stores the header's k in *k_out when given.
DenseMatrix read_embedding_csv(const std::filesystem::path& path, std::size_t* k_out = nullptr);

}  // namespace gnd
