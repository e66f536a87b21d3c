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

#include "gnd/model.hpp"

#include <array>
#include <cmath>
#include <string>

#include "gnd/errors.hpp"
#include "gnd/json_util.hpp"
#include "gnd/ops.hpp"
#include "gnd/optimizer.hpp"

namespace gnd {

namespace {

struct VariantName {
  Variant variant;
  const char* name;
};

constexpr std::array<VariantName, 7> kVariantNames{{
    {Variant::kGndSlp, "gnd_slp"},
    {Variant::kGndMlp, "gnd_mlp"},
    {Variant::kGndDs, "gnd_ds"},
    {Variant::kGcn, "gcn"},
    {Variant::kSgc, "sgc"},
    {Variant::kFixedPpr, "fixed_ppr"},
    {Variant::kFixedHeat, "fixed_heat"},
}};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidParameter, what);
}

}  // namespace

const char* variant_name(Variant v) {
  for (const auto& entry : kVariantNames)
    if (entry.variant == v) return entry.name;
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& entry : kVariantNames)
    if (entry.name == name) return entry.variant;
  throw Error(ErrorKind::kConfigError, "field 'variant': unknown model '" + std::string(name) +
                                           "'");
}

bool is_gnd(Variant v) {
  return v == Variant::kGndSlp || v == Variant::kGndMlp || v == Variant::kGndDs;
}

ModelConfig ModelConfig::defaults(Variant v) {
  ModelConfig c;
  c.variant = v;
  switch (v) {
    case Variant::kGndSlp:
      c.r = 16;
      c.k = 20;
      break;
    case Variant::kGndMlp:
      c.r = 64;
      c.k = 20;
      c.hidden_mlp = {32};
      break;
    case Variant::kGndDs:
      c.r = 64;
      c.k = 10;
      c.t = 2;
      break;
    case Variant::kGcn:
      c.gcn_hidden = 16;
      c.dropout = 0.5;
      break;
    case Variant::kSgc:
      c.k = 2;
      c.dropout = 0.0;
      break;
    case Variant::kFixedPpr:
    case Variant::kFixedHeat:
      c.r = 16;
      c.k = 20;
      break;
  }
  return c;
}

void ModelConfig::validate() const {
  if (k < 1) invalid("K must be >= 1");
  if (r < 1) invalid("r must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) invalid("dropout must lie in [0, 1)");
  if (variant == Variant::kGndMlp && (hidden_mlp.size() != 1 || hidden_mlp[0] < 1)) {
    invalid("gnd_mlp needs exactly one positive hidden width");
  }
  if (variant == Variant::kGndDs && (hidden_mlp.size() > 1 ||
                                     (hidden_mlp.size() == 1 && hidden_mlp[0] < 1))) {
    invalid("gnd_ds takes at most one positive hidden width");
  }
  if (variant == Variant::kGcn && gcn_hidden < 1) invalid("gcn_hidden must be >= 1");
  if (variant == Variant::kFixedPpr && !(gamma > 0.0 && gamma < 1.0)) {
    invalid("gamma must lie in (0, 1)");
  }
  if (variant == Variant::kFixedHeat && !(t_heat > 0.0)) invalid("t_heat must be > 0");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", variant_name(c.variant)},
          {"K", c.k},
          {"T", c.t},
          {"r", c.r},
          {"hidden_mlp", c.hidden_mlp},
          {"gcn_hidden", c.gcn_hidden},
          {"dropout", c.dropout},
          {"gamma", c.gamma},
          {"t_heat", c.t_heat},
          {"renormalize", c.renormalize},
          {"symmetric_sgc", c.symmetric_sgc}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  using namespace json_util;
  constexpr std::string_view path = "model";
  reject_unknown_keys(j, path,
                      {"variant", "K", "T", "r", "hidden_mlp", "gcn_hidden", "dropout", "gamma",
                       "t_heat", "renormalize", "symmetric_sgc"});
  const auto name = get_string(j, "variant", path, "gnd_slp");
  ModelConfig c = ModelConfig::defaults(parse_variant(name));
  c.k = get_count(j, "K", path, c.k);
  c.t = get_count(j, "T", path, c.t);
  c.r = get_count(j, "r", path, c.r);
  c.hidden_mlp = get_count_list(j, "hidden_mlp", path, c.hidden_mlp);
  c.gcn_hidden = get_count(j, "gcn_hidden", path, c.gcn_hidden);
  c.dropout = get_real(j, "dropout", path, c.dropout);
  c.gamma = get_real(j, "gamma", path, c.gamma);
  c.t_heat = get_real(j, "t_heat", path, c.t_heat);
  c.renormalize = get_bool(j, "renormalize", path, c.renormalize);
  c.symmetric_sgc = get_bool(j, "symmetric_sgc", path, c.symmetric_sgc);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfigError, std::string("field 'model': ") + e.what());
  }
  return c;
}

GraphOperators GraphOperators::from_graph(const Graph& g) {
  const SparseMatrix a_tilde = add_self_loops(g);
  return {transition_matrix(a_tilde), renormalized_smoothing(a_tilde)};
}

Model Model::create(const ModelConfig& config, std::size_t feature_dim, std::size_t n_classes,
                    Rng& rng) {
  config.validate();
  if (feature_dim < 1 || n_classes < 1) invalid("model needs feature_dim and n_classes >= 1");
  Model m;
  m.config_ = config;
  m.feature_dim_ = feature_dim;
  m.n_classes_ = n_classes;
  auto glorot = [&rng](std::size_t rows, std::size_t cols) {
    return ad::Parameter(ad::glorot_init(rows, cols, rng));
  };
  switch (config.variant) {
    case Variant::kGndSlp:
      m.theta = glorot(feature_dim, config.r);
      m.diffusion = SlpDiffusion::uniform(config.k);
      m.theta_prime = glorot(config.r, n_classes);
      break;
    case Variant::kGndMlp:
      m.theta = glorot(feature_dim, config.r);
      m.diffusion = MlpDiffusion::glorot(config.k, config.hidden_mlp.at(0), rng);
      m.theta_prime = glorot(config.r, n_classes);
      break;
    case Variant::kGndDs: {
      const std::size_t hidden = config.hidden_mlp.empty() ? n_classes : config.hidden_mlp[0];
      m.theta = glorot(feature_dim, config.r);
      m.diffusion = DsDiffusion::glorot(config.r, hidden, config.k, config.t, rng);
      m.theta_prime = glorot(config.r, n_classes);
      break;
    }
    case Variant::kFixedPpr:
    case Variant::kFixedHeat: {
      DiffusionSchedule s;
      s.kind = config.variant == Variant::kFixedPpr ? ScheduleKind::kPersonalizedPageRank
                                                    : ScheduleKind::kHeatKernel;
      s.gamma = config.gamma;
      s.t = config.t_heat;
      s.k = config.k;
      s.renormalize = config.renormalize;
      schedule_coefficients(s);  // validates
      m.theta = glorot(feature_dim, config.r);
      m.diffusion = s;
      m.theta_prime = glorot(config.r, n_classes);
      break;
    }
    case Variant::kGcn:
      m.gcn_layer0 = glorot(feature_dim, config.gcn_hidden);
      m.gcn_layer1 = glorot(config.gcn_hidden, n_classes);
      break;
    case Variant::kSgc:
      m.theta = glorot(feature_dim, n_classes);
      break;
  }
  return m;
}

std::vector<std::pair<std::string, ad::Parameter*>> Model::parameters() {
  std::vector<std::pair<std::string, ad::Parameter*>> out;
  switch (config_.variant) {
    case Variant::kGcn:
      out.emplace_back("gcn_layer0", &gcn_layer0);
      out.emplace_back("gcn_layer1", &gcn_layer1);
      return out;
    case Variant::kSgc:
      out.emplace_back("theta", &theta);
      return out;
    default:
      break;
  }
  out.emplace_back("theta", &theta);
  if (auto* slp = std::get_if<SlpDiffusion>(&diffusion)) {
    out.emplace_back("alpha", &slp->alpha);
  } else if (auto* mlp = std::get_if<MlpDiffusion>(&diffusion)) {
    out.emplace_back("mlp_layer1", &mlp->layer1);
    out.emplace_back("mlp_layer2", &mlp->layer2);
  } else if (auto* ds = std::get_if<DsDiffusion>(&diffusion)) {
    out.emplace_back("ds_layer1", &ds->layer1);
    out.emplace_back("ds_layer2", &ds->layer2);
  }
  out.emplace_back("theta_prime", &theta_prime);
  return out;
}

std::vector<std::pair<std::string, const ad::Parameter*>> Model::parameters() const {
  std::vector<std::pair<std::string, const ad::Parameter*>> out;
  for (auto& [name, p] : const_cast<Model*>(this)->parameters()) out.emplace_back(name, p);
  return out;
}

ad::Parameter* Model::find(std::string_view name) {
  for (auto& [n, p] : parameters())
    if (n == name) return p;
  return nullptr;
}

ad::Var Model::forward_hidden(ad::Tape& tape, const GraphOperators& ops,
                              const DenseMatrix& features, bool training, Rng& dropout_rng) {
  if (features.rows() != ops.transition.n_rows() || features.cols() != feature_dim_) {
    throw Error(ErrorKind::kDimensionMismatch,
                "features " + std::to_string(features.rows()) + "x" +
                    std::to_string(features.cols()) + " for a model over " +
                    std::to_string(feature_dim_) + " features and a graph of " +
                    std::to_string(ops.transition.n_rows()) + " vertices");
  }
  if (config_.variant == Variant::kGcn || config_.variant == Variant::kSgc) {
    throw Error(ErrorKind::kInvalidParameter,
                std::string(variant_name(config_.variant)) + " has no diffusion representation");
  }
  const ad::Var x = ad::dropout(tape.constant(features), config_.dropout, training, dropout_rng);
  const ad::Var z = ad::matmul(x, tape.parameter(theta));
  const SparseMatrix& w = ops.transition;

  if (auto* slp = std::get_if<SlpDiffusion>(&diffusion)) {
    const auto hops = hop_sequence(w, z, config_.k);
    return slp_aggregate(hops, tape.parameter(slp->alpha));
  }
  if (auto* mlp = std::get_if<MlpDiffusion>(&diffusion)) {
    const auto hops = hop_sequence(w, z, config_.k);
    return mlp_aggregate(hops, tape.parameter(mlp->layer1), tape.parameter(mlp->layer2));
  }
  if (auto* ds = std::get_if<DsDiffusion>(&diffusion)) {
    return ds_evolve(z, w, tape.parameter(ds->layer1), tape.parameter(ds->layer2), ds->k, ds->t);
  }
  const auto& schedule = std::get<DiffusionSchedule>(diffusion);
  const auto coefficients = schedule_coefficients(schedule);
  const auto hops = hop_sequence(w, z, config_.k);
  const ad::Var alpha =
      tape.constant(DenseMatrix(1, coefficients.size(), coefficients));
  return ad::relu(linear_aggregate(hops, alpha));
}

ad::Var Model::forward_logits(ad::Tape& tape, const GraphOperators& ops,
                              const DenseMatrix& features, bool training, Rng& dropout_rng) {
  switch (config_.variant) {
    case Variant::kGcn: {
      const ad::Var x =
          ad::dropout(tape.constant(features), config_.dropout, training, dropout_rng);
      ad::Var h = ad::relu(ad::spmm(ops.smoothing, ad::matmul(x, tape.parameter(gcn_layer0))));
      h = ad::dropout(h, config_.dropout, training, dropout_rng);
      return ad::spmm(ops.smoothing, ad::matmul(h, tape.parameter(gcn_layer1)));
    }
    case Variant::kSgc: {
      const SparseMatrix& w = config_.symmetric_sgc ? ops.smoothing : ops.transition;
      if (features.cols() != feature_dim_) {
        throw Error(ErrorKind::kDimensionMismatch, "feature width does not match the model");
      }
      // W^K X is constant, so propagate before the weights.
      ad::Var x = ad::dropout(tape.constant(features), config_.dropout, training, dropout_rng);
      for (std::size_t i = 0; i < config_.k; ++i) x = ad::spmm(w, x);
      return ad::matmul(x, tape.parameter(theta));
    }
    default: {
      ad::Var h = forward_hidden(tape, ops, features, training, dropout_rng);
      h = ad::dropout(h, config_.dropout, training, dropout_rng);
      return ad::matmul(h, tape.parameter(theta_prime));
    }
  }
}

DenseMatrix Model::predict(const GraphOperators& ops, const DenseMatrix& features) {
  ad::Tape tape;
  Rng unused(0);
  return softmax_rows(forward_logits(tape, ops, features, false, unused).value());
}

DenseMatrix forward_gnd(Model& m, const GraphOperators& ops, const DenseMatrix& features,
                        bool training, Rng& dropout_rng) {
  if (!is_gnd(m.config().variant)) invalid("forward_gnd needs a gnd_* variant");
  ad::Tape tape;
  return softmax_rows(m.forward_logits(tape, ops, features, training, dropout_rng).value());
}

DenseMatrix forward_gcn(Model& m, const GraphOperators& ops, const DenseMatrix& features,
                        bool training, Rng& dropout_rng) {
  if (m.config().variant != Variant::kGcn) invalid("forward_gcn needs the gcn variant");
  ad::Tape tape;
  return softmax_rows(m.forward_logits(tape, ops, features, training, dropout_rng).value());
}

DenseMatrix forward_sgc(Model& m, const GraphOperators& ops, const DenseMatrix& features) {
  if (m.config().variant != Variant::kSgc) invalid("forward_sgc needs the sgc variant");
  return m.predict(ops, features);
}

double loss(const Model& m, const DenseMatrix& y_pred, std::span<const int> labels,
            std::span<const std::size_t> rows, double l2) {
  if (rows.empty()) throw Error(ErrorKind::kEmptyMask, "loss over no vertices");
  if (labels.size() != y_pred.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "label count does not match predictions");
  }
  double ce = 0.0;
  for (std::size_t i : rows) {
    if (i >= labels.size()) invalid("row index out of range");
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= y_pred.cols()) {
      throw Error(ErrorKind::kUnknownLabel, "vertex " + std::to_string(i) + " has no class");
    }
    ce -= std::log(std::max(y_pred(i, static_cast<std::size_t>(y)), ad::kLogClamp));
  }
  ce /= static_cast<double>(rows.size());
  double penalty = 0.0;
  for (const auto& [name, p] : m.parameters())
    for (double v : p->value.data()) penalty += v * v;
  return ce + l2 * penalty;
}

nlohmann::json save_checkpoint(const Model& m) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, p] : m.parameters()) params[name] = json_util::matrix_to_json(p->value);
  return {{"config", to_json(m.config())},
          {"feature_dim", m.feature_dim()},
          {"n_classes", m.n_classes()},
          {"parameters", std::move(params)}};
}

Model load_checkpoint(const nlohmann::json& j) {
  using namespace json_util;
  reject_unknown_keys(j, "", {"config", "feature_dim", "n_classes", "parameters"});
  if (!j.contains("config") || !j.contains("parameters")) {
    throw Error(ErrorKind::kConfigError, "checkpoint needs 'config' and 'parameters'");
  }
  const ModelConfig config = model_config_from_json(j.at("config"));
  const auto feature_dim = get_count(j, "feature_dim", "", 0);
  const auto n_classes = get_count(j, "n_classes", "", 0);
  Rng rng(0);
  Model m = Model::create(config, feature_dim, n_classes, rng);
  const auto& params = j.at("parameters");
  require_object(params, "parameters");
  if (params.size() != m.parameters().size()) {
    throw Error(ErrorKind::kConfigError, "field 'parameters': wrong parameter count");
  }
  for (auto& [name, p] : m.parameters()) {
    if (!params.contains(name)) {
      throw Error(ErrorKind::kConfigError, "field 'parameters." + name + "': missing");
    }
    DenseMatrix value = matrix_from_json(params.at(name), "parameters." + name);
    if (!value.same_shape(p->value)) {
      throw Error(ErrorKind::kConfigError, "field 'parameters." + name + "': wrong shape");
    }
    *p = ad::Parameter(std::move(value));
  }
  return m;
}

}  // namespace gnd
