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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "gnd/graph.hpp"
#include "gnd/model.hpp"

namespace gnd {

struct TrainConfig {
  double lr = 0.005;
  double l2 = 5e-4;
  std::size_t max_epochs = 1000;
  std::size_t patience_window = 50;
  std::uint64_t seed = 0;
};

struct SplitSpec {
  std::size_t labels_per_class = 5;
  std::size_t validation_size = 500;
  std::uint64_t seed = 0;
};

// Sorted vertex index lists; pairwise disjoint.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// labels_per_class training vertices from every class, then validation_size
// vertices drawn uniformly from the remaining labeled vertices; every other
// labeled vertex is test data. Throws InsufficientVertices naming the class.
Split sample_split(const Graph& g, const SplitSpec& s);

// Throws if any two of the three sets intersect.
void check_disjoint(const Split& split);

// "No improvement for `patience` consecutive epochs" rule. Improvement means
// strictly below the best value seen so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when `loss` is a new best.
  bool observe(std::size_t epoch, double loss);
  bool should_stop() const { return since_best_ >= patience_; }
  double best_loss() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t stopped_epoch = 0;
};

// Drives epochs 1..max_epochs. `run_epoch` trains one epoch and reports its
// losses; `on_best` fires after every epoch whose validation loss is a new
// best (so the caller can snapshot). Stops once the patience window is
// exhausted.
TrainHistory run_training_loop(std::size_t max_epochs, std::size_t patience,
                               const std::function<EpochRecord(std::size_t)>& run_epoch,
                               const std::function<void(std::size_t)>& on_best);

// Full-graph training with Adam; leaves `model` at its best-validation-loss
// parameters. NonFiniteValue errors are re-thrown with the epoch index.
TrainHistory train(Model& model, const Graph& g, const GraphOperators& ops, const Split& split,
                   const TrainConfig& cfg);

// Fraction of `rows` whose argmax prediction matches the label.
double evaluate(Model& model, const Graph& g, const GraphOperators& ops,
                std::span<const std::size_t> rows);
double accuracy(const DenseMatrix& y_pred, std::span<const int> labels,
                std::span<const std::size_t> rows);

struct ExperimentResult {
  std::vector<double> per_run_accuracy;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::vector<std::size_t> per_run_epochs;
  std::vector<double> per_run_seconds;
  double wall_time = 0.0;
  // gnd_slp only: mean over runs of |alpha_k|.
  std::optional<std::vector<double>> learned_alpha_abs_mean;
};

// `runs` independent splits and trainings. Run i uses split seed s.seed + i
// and training seed cfg.seed + i; runs may execute on up to `threads`
// threads and the result does not depend on that number.
ExperimentResult run_experiment(const Graph& g, const ModelConfig& mc, const TrainConfig& tc,
                                const SplitSpec& s, std::size_t runs, std::size_t threads = 1);

// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_and_std(std::span<const double> values);

// Deterministic fields only unless include_timing is set.
nlohmann::json to_json(const ExperimentResult& r, bool include_timing = false);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SplitSpec& s);
TrainConfig train_config_from_json(const nlohmann::json& j);
SplitSpec split_spec_from_json(const nlohmann::json& j);

}  // namespace gnd
