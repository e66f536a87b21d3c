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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gnd/dense_matrix.hpp"
#include "gnd/diffusion.hpp"
#include "gnd/graph.hpp"
#include "gnd/rng.hpp"
#include "gnd/sparse_matrix.hpp"
#include "gnd/tape.hpp"

namespace gnd {

enum class Variant { kGndSlp, kGndMlp, kGndDs, kGcn, kSgc, kFixedPpr, kFixedHeat };

const char* variant_name(Variant v);
// Throws Error(kConfigError) for unknown names.
Variant parse_variant(std::string_view name);
bool is_gnd(Variant v);

struct ModelConfig {
  Variant variant = Variant::kGndSlp;
  std::size_t k = 20;  // hops (GND, fixed), power (SGC)
  std::size_t t = 2;   // Euler steps, gnd_ds only
  std::size_t r = 16;  // columns of theta
  // gnd_mlp: hidden widths of the hop-axis MLP ({32}). gnd_ds: hidden width of
  // g(); empty means "number of classes".
  std::vector<std::size_t> hidden_mlp;
  std::size_t gcn_hidden = 16;
  double dropout = 0.6;
  double gamma = 0.9;   // fixed_ppr teleport probability
  double t_heat = 5.0;  // fixed_heat diffusion time
  bool renormalize = false;     // fixed_*: rescale truncated coefficients to sum 1
  bool symmetric_sgc = false;   // sgc: use D^-1/2 A D^-1/2 instead of D^-1 A

  // Per-variant defaults.
  static ModelConfig defaults(Variant v);
  // Throws Error(kInvalidParameter) when fields are out of range.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
// Starts from defaults(variant) and overrides the keys present. Unknown keys
// throw Error(kConfigError).
ModelConfig model_config_from_json(const nlohmann::json& j);

// Sparse operators derived once per graph.
struct GraphOperators {
  SparseMatrix transition;  // D~^-1 A~
  SparseMatrix smoothing;   // D~^-1/2 A~ D~^-1/2

  static GraphOperators from_graph(const Graph& g);
};

class Model {
 public:
  using Diffusion =
      std::variant<std::monostate, DiffusionSchedule, SlpDiffusion, MlpDiffusion, DsDiffusion>;

  // Glorot-initialised weights; SLP weights start at 1/K.
  static Model create(const ModelConfig& config, std::size_t feature_dim, std::size_t n_classes,
                      Rng& rng);

  const ModelConfig& config() const { return config_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t n_classes() const { return n_classes_; }

  // Every trainable parameter in a fixed order with a stable name.
  std::vector<std::pair<std::string, ad::Parameter*>> parameters();
  std::vector<std::pair<std::string, const ad::Parameter*>> parameters() const;
  ad::Parameter* find(std::string_view name);

  // Records the forward pass on `tape` and returns the n x C logits.
  ad::Var forward_logits(ad::Tape& tape, const GraphOperators& ops, const DenseMatrix& features,
                         bool training, Rng& dropout_rng);
  // Pre-classifier representation H (GND and fixed variants only).
  ad::Var forward_hidden(ad::Tape& tape, const GraphOperators& ops, const DenseMatrix& features,
                         bool training, Rng& dropout_rng);

  // Evaluation-mode class probabilities.
  DenseMatrix predict(const GraphOperators& ops, const DenseMatrix& features);

  ad::Parameter theta;
  ad::Parameter theta_prime;
  Diffusion diffusion;
  ad::Parameter gcn_layer0;
  ad::Parameter gcn_layer1;

 private:
  ModelConfig config_;
  std::size_t feature_dim_ = 0;
  std::size_t n_classes_ = 0;
};

// Y = softmax(dropout(H) Theta') with Z = dropout(X) Theta feeding the
// variant's diffusion. Row-stochastic n x C.
DenseMatrix forward_gnd(Model& m, const GraphOperators& ops, const DenseMatrix& features,
                        bool training, Rng& dropout_rng);
// Y = softmax(S ReLU(S dropout(X) W0) W1).
DenseMatrix forward_gcn(Model& m, const GraphOperators& ops, const DenseMatrix& features,
                        bool training, Rng& dropout_rng);
// Y = softmax(W^K X Theta).
DenseMatrix forward_sgc(Model& m, const GraphOperators& ops, const DenseMatrix& features);

// Mean clamped cross-entropy over `rows` plus l2 * sum of squared weights.
double loss(const Model& m, const DenseMatrix& y_pred, std::span<const int> labels,
            std::span<const std::size_t> rows, double l2);

// Checkpoint: {"config", "feature_dim", "n_classes", "parameters": {name:
// {"rows", "cols", "values": [hex-float strings]}}}. Round-trips bitwise.
nlohmann::json save_checkpoint(const Model& m);
Model load_checkpoint(const nlohmann::json& j);

}  // namespace gnd
