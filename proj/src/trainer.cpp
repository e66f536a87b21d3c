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

#include "gnd/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "gnd/errors.hpp"
#include "gnd/json_util.hpp"
#include "gnd/ops.hpp"
#include "gnd/optimizer.hpp"
#include "gnd/rng.hpp"

namespace gnd {

Split sample_split(const Graph& g, const SplitSpec& s) {
  if (g.labels.size() != g.n_vertices) {
    throw Error(ErrorKind::kInconsistentVertexCount, "label vector does not match the graph");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(g.n_classes));
  for (std::size_t v = 0; v < g.n_vertices; ++v) {
    const int y = g.labels[v];
    if (y == kUnlabeled) continue;
    if (y < 0 || y >= g.n_classes) {
      throw Error(ErrorKind::kUnknownLabel,
                  "vertex " + std::to_string(v) + " has label " + std::to_string(y));
    }
    by_class[static_cast<std::size_t>(y)].push_back(v);
  }

  Rng rng(derive_seed(s.seed, 0));
  Split split;
  std::vector<char> taken(g.n_vertices, 0);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& pool = by_class[c];
    if (pool.size() < s.labels_per_class) {
      throw Error(ErrorKind::kInsufficientVertices,
                  "class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                      " labeled vertices, " + std::to_string(s.labels_per_class) +
                      " requested");
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < s.labels_per_class; ++i) {
      split.train.push_back(pool[i]);
      taken[pool[i]] = 1;
    }
  }

  std::vector<std::size_t> rest;
  for (std::size_t v = 0; v < g.n_vertices; ++v)
    if (g.labels[v] != kUnlabeled && !taken[v]) rest.push_back(v);
  if (rest.size() < s.validation_size + 1) {
    throw Error(ErrorKind::kInsufficientVertices,
                std::to_string(rest.size()) + " labeled vertices left after training sample; " +
                    std::to_string(s.validation_size) + " validation + at least 1 test needed");
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  split.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(s.validation_size));
  split.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(s.validation_size), rest.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void check_disjoint(const Split& split) {
  auto overlaps = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return !common.empty();
  };
  if (overlaps(split.train, split.val) || overlaps(split.train, split.test) ||
      overlaps(split.val, split.test)) {
    throw Error(ErrorKind::kInvalidParameter, "train/validation/test sets overlap");
  }
}

bool EarlyStopping::observe(std::size_t epoch, double loss) {
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

TrainHistory run_training_loop(std::size_t max_epochs, std::size_t patience,
                               const std::function<EpochRecord(std::size_t)>& run_epoch,
                               const std::function<void(std::size_t)>& on_best) {
  TrainHistory history;
  EarlyStopping stopper(patience);
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    EpochRecord record = run_epoch(epoch);
    record.epoch = epoch;
    history.epochs.push_back(record);
    history.stopped_epoch = epoch;
    if (stopper.observe(epoch, record.val_loss) && on_best) on_best(epoch);
    if (stopper.should_stop()) break;
  }
  history.best_epoch = stopper.best_epoch();
  history.best_val_loss = stopper.best_loss();
  return history;
}

double accuracy(const DenseMatrix& y_pred, std::span<const int> labels,
                std::span<const std::size_t> rows) {
  if (rows.empty()) throw Error(ErrorKind::kEmptyMask, "accuracy over no vertices");
  const auto predicted = row_argmax(y_pred);
  std::size_t correct = 0;
  for (std::size_t i : rows)
    if (predicted.at(i) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double evaluate(Model& model, const Graph& g, const GraphOperators& ops,
                std::span<const std::size_t> rows) {
  if (rows.empty()) throw Error(ErrorKind::kEmptyMask, "evaluation over no vertices");
  return accuracy(model.predict(ops, g.features), g.labels, rows);
}

TrainHistory train(Model& model, const Graph& g, const GraphOperators& ops, const Split& split,
                   const TrainConfig& cfg) {
  if (split.train.empty()) throw Error(ErrorKind::kEmptyMask, "empty training set");
  if (split.val.empty()) throw Error(ErrorKind::kEmptyMask, "empty validation set");
  check_disjoint(split);

  auto params = model.parameters();
  for (auto& [name, p] : params) p->reset_optimizer_state();
  const ad::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.l2};
  Rng dropout_rng(derive_seed(cfg.seed, 2));
  std::vector<DenseMatrix> best_values;
  for (auto& [name, p] : params) best_values.push_back(p->value);

  auto run_epoch = [&](std::size_t epoch) {
    try {
      EpochRecord record;
      double penalty = 0.0;
      for (auto& [name, p] : params)
        for (double v : p->value.data()) penalty += v * v;
      {
        ad::Tape tape;
        const ad::Var logits = model.forward_logits(tape, ops, g.features, true, dropout_rng);
        const ad::Var ce = ad::masked_softmax_cross_entropy(logits, g.labels, split.train);
        record.train_loss = ce.value()(0, 0) + cfg.l2 * penalty;
        tape.backward(ce);
      }
      for (auto& [name, p] : params) ad::adam_step(*p, adam);
      const DenseMatrix probs = model.predict(ops, g.features);
      record.val_loss = loss(model, probs, g.labels, split.val, cfg.l2);
      if (!std::isfinite(record.val_loss)) {
        throw Error(ErrorKind::kNonFiniteValue, "validation loss");
      }
      return record;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNonFiniteValue) throw;
      throw Error(ErrorKind::kNonFiniteValue,
                  "training aborted at epoch " + std::to_string(epoch) + " (" + e.what() + ")");
    }
  };
  auto on_best = [&](std::size_t) {
    for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i].second->value;
  };

  TrainHistory history = run_training_loop(cfg.max_epochs, cfg.patience_window, run_epoch, on_best);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].second->value = best_values[i];
  return history;
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double total = 0.0;
  for (double v : values) total += v;
  const double mean = total / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

namespace {

struct RunOutcome {
  double accuracy = 0.0;
  std::size_t epochs = 0;
  double seconds = 0.0;
  std::vector<double> alpha;
};

RunOutcome run_once(const Graph& g, const GraphOperators& ops, const ModelConfig& mc,
                    const TrainConfig& tc, const SplitSpec& s, std::size_t run) {
  const auto start = std::chrono::steady_clock::now();
  SplitSpec run_split = s;
  run_split.seed = s.seed + run;
  TrainConfig run_train = tc;
  run_train.seed = tc.seed + run;

  const Split split = sample_split(g, run_split);
  check_disjoint(split);
  Rng init_rng(derive_seed(run_train.seed, 1));
  Model model =
      Model::create(mc, g.features.cols(), static_cast<std::size_t>(g.n_classes), init_rng);
  const TrainHistory history = train(model, g, ops, split, run_train);

  RunOutcome out;
  out.accuracy = evaluate(model, g, ops, split.test);
  out.epochs = history.stopped_epoch;
  if (const auto* slp = std::get_if<SlpDiffusion>(&model.diffusion)) {
    for (double a : slp->alpha.value.data()) out.alpha.push_back(std::abs(a));
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ExperimentResult run_experiment(const Graph& g, const ModelConfig& mc, const TrainConfig& tc,
                                const SplitSpec& s, std::size_t runs, std::size_t threads) {
  if (runs < 1) throw Error(ErrorKind::kInvalidParameter, "runs must be >= 1");
  g.validate();
  const auto start = std::chrono::steady_clock::now();
  const GraphOperators ops = GraphOperators::from_graph(g);

  std::vector<RunOutcome> outcomes(runs);
  std::vector<std::exception_ptr> failures(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      try {
        outcomes[i] = run_once(g, ops, mc, tc, s, i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  ExperimentResult result;
  for (const auto& o : outcomes) {
    result.per_run_accuracy.push_back(o.accuracy);
    result.per_run_epochs.push_back(o.epochs);
    result.per_run_seconds.push_back(o.seconds);
  }
  std::tie(result.mean, result.std) = mean_and_std(result.per_run_accuracy);
  if (mc.variant == Variant::kGndSlp) {
    std::vector<double> alpha(mc.k, 0.0);
    for (const auto& o : outcomes)
      for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] += o.alpha[k];
    for (double& a : alpha) a /= static_cast<double>(runs);
    result.learned_alpha_abs_mean = std::move(alpha);
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::json to_json(const ExperimentResult& r, bool include_timing) {
  nlohmann::json j = {{"per_run_accuracy", r.per_run_accuracy},
                      {"mean", r.mean},
                      {"std", r.std},
                      {"runs", r.per_run_accuracy.size()},
                      {"per_run_epochs", r.per_run_epochs}};
  if (r.learned_alpha_abs_mean) j["learned_alpha_abs_mean"] = *r.learned_alpha_abs_mean;
  if (include_timing) {
    j["per_run_seconds"] = r.per_run_seconds;
    j["wall_time"] = r.wall_time;
  }
  return j;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"l2", c.l2},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience_window},
          {"seed", c.seed}};
}

nlohmann::json to_json(const SplitSpec& s) {
  return {{"labels_per_class", s.labels_per_class},
          {"validation_size", s.validation_size},
          {"seed", s.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  using namespace json_util;
  constexpr std::string_view path = "train";
  reject_unknown_keys(j, path, {"lr", "l2", "max_epochs", "patience", "seed"});
  TrainConfig c;
  c.lr = get_real(j, "lr", path, c.lr);
  c.l2 = get_real(j, "l2", path, c.l2);
  c.max_epochs = get_count(j, "max_epochs", path, c.max_epochs);
  c.patience_window = get_count(j, "patience", path, c.patience_window);
  c.seed = get_seed(j, "seed", path, c.seed);
  if (c.lr < 0.0) throw Error(ErrorKind::kConfigError, "field 'train.lr': must be >= 0");
  if (c.l2 < 0.0) throw Error(ErrorKind::kConfigError, "field 'train.l2': must be >= 0");
  if (c.max_epochs < 1) {
    throw Error(ErrorKind::kConfigError, "field 'train.max_epochs': must be >= 1");
  }
  return c;
}

SplitSpec split_spec_from_json(const nlohmann::json& j) {
  using namespace json_util;
  constexpr std::string_view path = "split";
  reject_unknown_keys(j, path, {"labels_per_class", "validation_size", "seed"});
  SplitSpec s;
  s.labels_per_class = get_count(j, "labels_per_class", path, s.labels_per_class);
  s.validation_size = get_count(j, "validation_size", path, s.validation_size);
  s.seed = get_seed(j, "seed", path, s.seed);
  if (s.labels_per_class < 1) {
    throw Error(ErrorKind::kConfigError, "field 'split.labels_per_class': must be >= 1");
  }
  if (s.validation_size < 1) {
    throw Error(ErrorKind::kConfigError, "field 'split.validation_size': must be >= 1");
  }
  return s;
}

}  // namespace gnd
