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

#include "gnd/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "gnd/errors.hpp"
#include "gnd/json_util.hpp"
#include "gnd/rng.hpp"

namespace gnd {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  return out;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& why) {
  throw Error(ErrorKind::kParseError,
              path.string() + ":" + std::to_string(line) + ": " + why);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  // std::from_chars<double> is missing on older toolchains; strtod is enough.
  std::string buf(trim(token));
  if (buf.empty()) return false;
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  token = trim(token);
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && !token.empty();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_csv(std::istream& in, const std::filesystem::path& path,
                            std::size_t first_line) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = first_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) parse_error(path, line_no, "bad number");
      data.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      parse_error(path, line_no,
                  "expected " + std::to_string(cols) + " values, got " + std::to_string(count));
    }
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace

DatasetFiles DatasetFiles::in_directory(const std::filesystem::path& dir) {
  return {dir / "edges.txt", dir / "features.csv", dir / "labels.txt"};
}

Graph load_dataset(const DatasetFiles& files) {
  DenseMatrix features;
  {
    auto in = open_input(files.features);
    features = read_matrix_csv(in, files.features, 0);
  }
  const std::size_t n = features.rows();

  std::vector<long long> raw_labels;
  {
    auto in = open_input(files.labels);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      long long y = 0;
      if (!parse_int(line, y)) parse_error(files.labels, line_no, "expected an integer label");
      if (y < -1) {
        throw Error(ErrorKind::kUnknownLabel, files.labels.string() + ":" +
                                                  std::to_string(line_no) + ": label " +
                                                  std::to_string(y));
      }
      raw_labels.push_back(y);
    }
  }
  if (raw_labels.size() != n) {
    throw Error(ErrorKind::kInconsistentVertexCount,
                std::to_string(raw_labels.size()) + " labels for " + std::to_string(n) +
                    " feature rows");
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  {
    auto in = open_input(files.edges);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      std::istringstream tokens{std::string(body)};
      std::string a, b, extra;
      std::size_t u = 0, v = 0;
      if (!(tokens >> a >> b) || (tokens >> extra) || !parse_int(a, u) || !parse_int(b, v)) {
        parse_error(files.edges, line_no, "expected two vertex ids");
      }
      if (u >= n || v >= n) {
        throw Error(ErrorKind::kInconsistentVertexCount,
                    files.edges.string() + ":" + std::to_string(line_no) + ": vertex id " +
                        std::to_string(std::max(u, v)) + " with only " + std::to_string(n) +
                        " vertices");
      }
      edges.emplace_back(u, v);
    }
  }

  Graph g = Graph::from_edges(n, edges);
  g.features = std::move(features);
  std::map<long long, int> class_of;
  for (long long y : raw_labels)
    if (y >= 0) class_of.emplace(y, 0);
  int next = 0;
  for (auto& [raw, id] : class_of) id = next++;
  for (std::size_t i = 0; i < n; ++i)
    g.labels[i] = raw_labels[i] < 0 ? kUnlabeled : class_of.at(raw_labels[i]);
  g.n_classes = next;
  g.validate();
  return g;
}

void save_dataset(const Graph& g, const DatasetFiles& files) {
  {
    auto out = open_output(files.edges);
    for (std::size_t u = 0; u < g.n_vertices; ++u)
      for (auto v : g.adjacency.row_cols(u))
        if (u < v) out << u << '\t' << v << '\n';
    if (!out) throw Error(ErrorKind::kIoError, "write failed: " + files.edges.string());
  }
  {
    auto out = open_output(files.features);
    write_matrix_csv(out, g.features);
    if (!out) throw Error(ErrorKind::kIoError, "write failed: " + files.features.string());
  }
  {
    auto out = open_output(files.labels);
    for (int y : g.labels) out << y << '\n';
    if (!out) throw Error(ErrorKind::kIoError, "write failed: " + files.labels.string());
  }
}

void SbmConfig::validate() const {
  if (n_per_class < 1 || n_classes < 1) {
    throw Error(ErrorKind::kInvalidParameter, "SBM needs at least one vertex and one class");
  }
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "SBM requires 0 <= p_out <= p_in <= 1");
  }
  if (feature_dim < n_classes) {
    throw Error(ErrorKind::kInvalidParameter, "SBM feature_dim must be >= n_classes");
  }
  if (!(feature_noise >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "SBM feature_noise must be >= 0");
  }
}

nlohmann::json to_json(const SbmConfig& c) {
  return {{"n_per_class", c.n_per_class}, {"n_classes", c.n_classes},
          {"p_in", c.p_in},               {"p_out", c.p_out},
          {"feature_dim", c.feature_dim}, {"feature_noise", c.feature_noise},
          {"seed", c.seed}};
}

SbmConfig sbm_config_from_json(const nlohmann::json& j) {
  using namespace json_util;
  constexpr std::string_view path = "sbm";
  reject_unknown_keys(j, path, {"n_per_class", "n_classes", "p_in", "p_out", "feature_dim",
                                "feature_noise", "seed"});
  SbmConfig c;
  c.n_per_class = get_count(j, "n_per_class", path, c.n_per_class);
  c.n_classes = get_count(j, "n_classes", path, c.n_classes);
  c.p_in = get_real(j, "p_in", path, c.p_in);
  c.p_out = get_real(j, "p_out", path, c.p_out);
  c.feature_dim = get_count(j, "feature_dim", path, c.feature_dim);
  c.feature_noise = get_real(j, "feature_noise", path, c.feature_noise);
  c.seed = get_seed(j, "seed", path, c.seed);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfigError, std::string("field 'sbm': ") + e.what());
  }
  return c;
}

Graph generate_sbm(const SbmConfig& c) {
  c.validate();
  const std::size_t n = c.n_per_class * c.n_classes;
  Rng rng(derive_seed(c.seed, 0));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t cu = u / c.n_per_class;
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = (v / c.n_per_class == cu) ? c.p_in : c.p_out;
      if (uniform(rng) < p) edges.emplace_back(u, v);
    }
  }
  Graph g = Graph::from_edges(n, edges);
  g.n_classes = static_cast<int>(c.n_classes);
  g.features = DenseMatrix(n, c.feature_dim);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t cls = u / c.n_per_class;
    g.labels[u] = static_cast<int>(cls);
    for (std::size_t j = 0; j < c.feature_dim; ++j) {
      g.features(u, j) = (j == cls ? 1.0 : 0.0) + c.feature_noise * noise(rng);
    }
  }
  return g;
}

std::vector<std::filesystem::path> dump_embeddings(const HopSequence& hops,
                                                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (std::size_t k = 0; k < hops.k(); ++k) {
    const auto path = dir / ("hop_" + std::to_string(k) + ".csv");
    auto out = open_output(path);
    out << "k=" << k << '\n';
    write_matrix_csv(out, hops[k]);
    if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

DenseMatrix read_embedding_csv(const std::filesystem::path& path, std::size_t* k_out) {
  auto in = open_input(path);
  std::string header;
  std::size_t k = 0;
  if (!std::getline(in, header) || header.rfind("k=", 0) != 0 ||
      !parse_int(std::string_view(header).substr(2), k)) {
    parse_error(path, 1, "expected a 'k=<k>' header");
  }
  if (k_out != nullptr) *k_out = k;
  return read_matrix_csv(in, path, 1);
}

}  // namespace gnd
