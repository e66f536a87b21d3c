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


#include "gnd/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnd/data_io.hpp"
#include "gnd/errors.hpp"
#include "gnd/json_util.hpp"
#include "gnd/model.hpp"
#include "gnd/optimizer.hpp"
#include "gnd/rng.hpp"
#include "gnd/trainer.hpp"

namespace gnd {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kDefaultOutput = "gndnet-out";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::kConfigError, what);
}

// Command-line overrides shared by every subcommand.
struct Overrides {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::string> sweep_parameter;
  std::vector<std::size_t> sweep_values;
  std::optional<std::size_t> dump_k;
};

// Parsed and validated JSON run specification.
struct RunSpec {
  std::optional<DatasetFiles> dataset;
  std::optional<SbmConfig> sbm;
  ModelConfig model;
  TrainConfig train;
  SplitSpec split;
  std::size_t runs = 30;
  std::uint64_t seed = 0;
  std::vector<ModelConfig> variants;
  std::vector<std::size_t> labels_per_class;
  std::string sweep_parameter = "K";
  std::vector<std::size_t> sweep_values;
  std::size_t dump_k = 20;
  fs::path output = kDefaultOutput;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open spec file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("spec file " + path.string() + " is not valid JSON: " + e.what());
  }
}

// Sub-objects without their own seed inherit the top-level one; --seed
// replaces every seed.
json with_seed(json j, std::string_view path, std::uint64_t seed, bool force) {
  if (j.is_null()) j = json::object();
  json_util::require_object(j, path);
  if (force || !j.contains("seed")) j["seed"] = seed;
  return j;
}

DatasetFiles dataset_from_json(const json& j, const fs::path& base) {
  using namespace json_util;
  constexpr std::string_view path = "dataset";
  reject_unknown_keys(j, path, {"dir", "edges", "features", "labels"});
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  if (j.contains("dir")) {
    if (j.contains("edges") || j.contains("features") || j.contains("labels")) {
      config_error("field 'dataset': give either 'dir' or the three file paths, not both");
    }
    return DatasetFiles::in_directory(resolve(get_string(j, "dir", path, "")));
  }
  for (const char* key : {"edges", "features", "labels"}) {
    if (!j.contains(key)) config_error(std::string("field 'dataset.") + key + "': missing");
  }
  return {resolve(get_string(j, "edges", path, "")), resolve(get_string(j, "features", path, "")),
          resolve(get_string(j, "labels", path, ""))};
}

RunSpec parse_spec(const json& j, const fs::path& base, const Overrides& o) {
  using namespace json_util;
  require_object(j, "spec");
  reject_unknown_keys(j, "spec",
                      {"dataset", "sbm", "model", "train", "split", "runs", "seed", "experiment",
                       "sweep", "dump", "output"});
  RunSpec s;
  s.seed = o.seed.value_or(get_seed(j, "seed", "spec", 0));
  const bool force = o.seed.has_value();

  if (j.contains("dataset") && j.contains("sbm")) {
    config_error("field 'dataset': 'dataset' and 'sbm' are mutually exclusive");
  }
  if (j.contains("dataset")) s.dataset = dataset_from_json(j.at("dataset"), base);
  if (j.contains("sbm")) {
    s.sbm = sbm_config_from_json(with_seed(j.at("sbm"), "sbm", s.seed, force));
  }
  const json model_json = j.value("model", json::object());
  s.model = model_config_from_json(model_json);
  s.train = train_config_from_json(with_seed(j.value("train", json()), "train", s.seed, force));
  s.split = split_spec_from_json(with_seed(j.value("split", json()), "split", s.seed, force));
  s.runs = get_count(j, "runs", "spec", s.runs);
  if (s.runs < 1) config_error("field 'runs': must be >= 1");

  s.variants = {s.model};
  s.labels_per_class = {s.split.labels_per_class};
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    reject_unknown_keys(e, "experiment", {"variants", "labels_per_class"});
    if (e.contains("variants")) {
      const json& list = e.at("variants");
      if (!list.is_array() || list.empty()) {
        config_error("field 'experiment.variants': expected a non-empty array");
      }
      s.variants.clear();
      for (const json& v : list) {
        if (v.is_string()) {
          s.variants.push_back(ModelConfig::defaults(parse_variant(v.get<std::string>())));
        } else {
          s.variants.push_back(model_config_from_json(v));
        }
      }
    }
    s.labels_per_class =
        get_count_list(e, "labels_per_class", "experiment", s.labels_per_class);
    if (s.labels_per_class.empty()) config_error("field 'experiment.labels_per_class': empty");
    for (std::size_t m : s.labels_per_class)
      if (m < 1) config_error("field 'experiment.labels_per_class': values must be >= 1");
  }
  if (j.contains("sweep")) {
    const json& w = j.at("sweep");
    reject_unknown_keys(w, "sweep", {"parameter", "values"});
    s.sweep_parameter = get_string(w, "parameter", "sweep", s.sweep_parameter);
    s.sweep_values = get_count_list(w, "values", "sweep", {});
  }
  if (o.sweep_parameter) s.sweep_parameter = *o.sweep_parameter;
  if (!o.sweep_values.empty()) s.sweep_values = o.sweep_values;
  if (j.contains("dump")) {
    reject_unknown_keys(j.at("dump"), "dump", {"K"});
    s.dump_k = get_count(j.at("dump"), "K", "dump", s.dump_k);
  }
  if (o.dump_k) s.dump_k = *o.dump_k;
  s.output = get_string(j, "output", "spec", kDefaultOutput);
  if (o.out) s.output = *o.out;
  return s;
}

Graph load_graph(const RunSpec& s) {
  if (s.dataset) return load_dataset(*s.dataset);
  if (s.sbm) return generate_sbm(*s.sbm);
  config_error("field 'dataset': the spec needs either 'dataset' or 'sbm'");
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string mean_pm_std(const ExperimentResult& r) {
  return percent(r.mean) + "±" + percent(r.std);
}

json common_fields(const char* command, const RunSpec& s) {
  json j = {{"command", command},
            {"train", to_json(s.train)},
            {"split", to_json(s.split)},
            {"runs", s.runs}};
  if (s.sbm) j["sbm"] = to_json(*s.sbm);
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json cmd_train(const RunSpec& s, std::ostream& err) {
  const Graph g = load_graph(s);
  const GraphOperators ops = GraphOperators::from_graph(g);
  const Split split = sample_split(g, s.split);
  Rng init_rng(derive_seed(s.train.seed, 1));
  Model model =
      Model::create(s.model, g.features.cols(), static_cast<std::size_t>(g.n_classes), init_rng);
  const auto start = std::chrono::steady_clock::now();
  const TrainHistory history = train(model, g, ops, split, s.train);
  err << "trained " << variant_name(s.model.variant) << " for " << history.stopped_epoch
      << " epochs in " << seconds_since(start) << " s\n";

  ensure_directory(s.output);
  const fs::path checkpoint = s.output / "checkpoint.json";
  write_text(checkpoint, save_checkpoint(model).dump(2) + "\n");

  json j = common_fields("train", s);
  j.erase("runs");
  j["model"] = to_json(s.model);
  j["train_accuracy"] = evaluate(model, g, ops, split.train);
  j["val_accuracy"] = evaluate(model, g, ops, split.val);
  j["test_accuracy"] = evaluate(model, g, ops, split.test);
  j["epochs"] = history.stopped_epoch;
  j["best_epoch"] = history.best_epoch;
  j["best_val_loss"] = history.best_val_loss;
  j["checkpoint"] = checkpoint.string();
  return j;
}

json cmd_experiment(const RunSpec& s, std::size_t threads, std::ostream& err) {
  const Graph g = load_graph(s);
  json cells = json::array();
  std::string long_csv = "variant,labels_per_class,runs,mean,std,cell\n";
  std::string table = "variant";
  for (std::size_t m : s.labels_per_class) table += ",m=" + std::to_string(m);
  table += "\n";

  for (const ModelConfig& mc : s.variants) {
    table += variant_name(mc.variant);
    for (std::size_t m : s.labels_per_class) {
      SplitSpec split = s.split;
      split.labels_per_class = m;
      const auto start = std::chrono::steady_clock::now();
      const ExperimentResult r = run_experiment(g, mc, s.train, split, s.runs, threads);
      err << variant_name(mc.variant) << " m=" << m << ": " << mean_pm_std(r) << " ("
          << seconds_since(start) << " s)\n";
      cells.push_back({{"variant", variant_name(mc.variant)},
                       {"labels_per_class", m},
                       {"model", to_json(mc)},
                       {"result", to_json(r)}});
      long_csv += std::string(variant_name(mc.variant)) + "," + std::to_string(m) + "," +
                  std::to_string(s.runs) + "," + percent(r.mean) + "," + percent(r.std) + "," +
                  mean_pm_std(r) + "\n";
      table += "," + mean_pm_std(r);
    }
    table += "\n";
  }

  json j = common_fields("experiment", s);
  j["results"] = std::move(cells);
  ensure_directory(s.output);
  write_text(s.output / "results.csv", long_csv);
  write_text(s.output / "table.csv", table);
  write_text(s.output / "results.json", j.dump(2) + "\n");
  return j;
}

json cmd_sweep(const RunSpec& s, std::size_t threads, std::ostream& err) {
  if (s.sweep_parameter != "K" && s.sweep_parameter != "T") {
    config_error("field 'sweep.parameter': expected \"K\" or \"T\"");
  }
  if (s.sweep_parameter == "T" && s.model.variant != Variant::kGndDs) {
    config_error("field 'sweep.parameter': T only applies to the gnd_ds variant");
  }
  if (s.sweep_values.empty()) config_error("field 'sweep.values': expected a non-empty list");

  const Graph g = load_graph(s);
  json rows = json::array();
  std::string csv = "value,mean,std\n";
  for (std::size_t v : s.sweep_values) {
    ModelConfig mc = s.model;
    (s.sweep_parameter == "K" ? mc.k : mc.t) = v;
    try {
      mc.validate();
    } catch (const Error& e) {
      config_error(std::string("field 'sweep.values': ") + e.what());
    }
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult r = run_experiment(g, mc, s.train, s.split, s.runs, threads);
    err << s.sweep_parameter << "=" << v << ": " << mean_pm_std(r) << " (" << seconds_since(start)
        << " s)\n";
    rows.push_back({{"value", v}, {"result", to_json(r)}});
    csv += std::to_string(v) + "," + percent(r.mean) + "," + percent(r.std) + "\n";
  }

  json j = common_fields("sweep", s);
  j["model"] = to_json(s.model);
  j["parameter"] = s.sweep_parameter;
  j["results"] = std::move(rows);
  ensure_directory(s.output);
  write_text(s.output / "sweep.csv", csv);
  write_text(s.output / "sweep.json", j.dump(2) + "\n");
  return j;
}

json cmd_dump(const RunSpec& s) {
  if (s.dump_k < 1) config_error("field 'dump.K': must be >= 1");
  const Graph g = load_graph(s);
  const GraphOperators ops = GraphOperators::from_graph(g);
  Rng rng(derive_seed(s.seed, 3));
  const DenseMatrix theta = ad::glorot_init(g.features.cols(), s.model.r, rng);
  const HopSequence hops = hop_sequence(ops.transition, matmul(g.features, theta), s.dump_k);
  json files = json::array();
  for (const auto& p : dump_embeddings(hops, s.output)) files.push_back(p.string());
  return {{"command", "dump"}, {"K", s.dump_k}, {"r", s.model.r}, {"seed", s.seed},
          {"files", std::move(files)}};
}

json cmd_gen_sbm(const RunSpec& s) {
  if (!s.sbm) config_error("field 'sbm': gen-sbm needs an 'sbm' object");
  const Graph g = generate_sbm(*s.sbm);
  ensure_directory(s.output);
  const DatasetFiles files = DatasetFiles::in_directory(s.output);
  save_dataset(g, files);
  return {{"command", "gen-sbm"},
          {"sbm", to_json(*s.sbm)},
          {"n_vertices", g.n_vertices},
          {"n_edges", g.adjacency.nnz() / 2},
          {"files",
           {{"edges", files.edges.string()},
            {"features", files.features.string()},
            {"labels", files.labels.string()}}}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph neural diffusion networks: training and experiment runner", "gndnet"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("spec", o.spec_path, "JSON run specification")->required();
    sub->add_option("--seed", o.seed, "Override every seed in the spec");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Maximum concurrent training runs")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* train_cmd = app.add_subcommand("train", "Train and evaluate one model");
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "Repeated-split accuracy table over variants and m");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Accuracy as a function of K or T");
  CLI::App* dump_cmd = app.add_subcommand("dump", "Write the hop sequence of a random projection");
  CLI::App* gen_cmd = app.add_subcommand("gen-sbm", "Write a stochastic block model dataset");
  for (CLI::App* sub : {train_cmd, experiment_cmd, sweep_cmd, dump_cmd, gen_cmd}) add_common(sub);
  sweep_cmd->add_option("--parameter", o.sweep_parameter, "K or T");
  sweep_cmd->add_option("--values", o.sweep_values, "Values to sweep");
  dump_cmd->add_option("--K", o.dump_k, "Number of hops");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const fs::path spec_path(o.spec_path);
    const RunSpec spec = parse_spec(read_json_file(spec_path), spec_path.parent_path(), o);
    json result;
    if (train_cmd->parsed()) result = cmd_train(spec, err);
    if (experiment_cmd->parsed()) result = cmd_experiment(spec, o.threads, err);
    if (sweep_cmd->parsed()) result = cmd_sweep(spec, o.threads, err);
    if (dump_cmd->parsed()) result = cmd_dump(spec);
    if (gen_cmd->parsed()) result = cmd_gen_sbm(spec);
    out << result.dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "gndnet: " << e.what() << '\n';
    return e.kind() == ErrorKind::kConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "gndnet: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace gnd
