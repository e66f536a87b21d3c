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

#include "gnd/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gnd/errors.hpp"

namespace gnd::json_util {

namespace {

std::string field(std::string_view path, std::string_view key) {
  std::string out(path);
  if (!out.empty()) out += '.';
  out += key;
  return out;
}

[[noreturn]] void bad(std::string_view path, std::string_view key, const std::string& why) {
  throw Error(ErrorKind::kConfigError, "field '" + field(path, key) + "': " + why);
}

// Parsed text yields unsigned numbers for non-negative literals, but values
// built in code are often signed; accept both when non-negative.
bool is_count(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

}  // namespace

void require_object(const nlohmann::json& j, std::string_view path) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kConfigError,
                "field '" + std::string(path.empty() ? "<root>" : path) + "': expected an object");
  }
}

void reject_unknown_keys(const nlohmann::json& j, std::string_view path,
                         std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      bad(path, item.key(), "unknown key");
    }
  }
}

std::size_t get_count(const nlohmann::json& j, std::string_view key, std::string_view path,
                      std::size_t fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!is_count(*it)) bad(path, key, "expected a non-negative integer");
  return it->get<std::size_t>();
}

std::uint64_t get_seed(const nlohmann::json& j, std::string_view key, std::string_view path,
                       std::uint64_t fallback) {
  return get_count(j, key, path, fallback);
}

double get_real(const nlohmann::json& j, std::string_view key, std::string_view path,
                double fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_number()) bad(path, key, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) bad(path, key, "expected a finite number");
  return v;
}

bool get_bool(const nlohmann::json& j, std::string_view key, std::string_view path,
              bool fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) bad(path, key, "expected true or false");
  return it->get<bool>();
}

std::string get_string(const nlohmann::json& j, std::string_view key, std::string_view path,
                       const std::string& fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_string()) bad(path, key, "expected a string");
  return it->get<std::string>();
}

std::vector<std::size_t> get_count_list(const nlohmann::json& j, std::string_view key,
                                        std::string_view path,
                                        const std::vector<std::size_t>& fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_array()) bad(path, key, "expected an array of non-negative integers");
  std::vector<std::size_t> out;
  for (const auto& v : *it) {
    if (!is_count(v)) bad(path, key, "expected an array of non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw Error(ErrorKind::kParseError, "not a number: '" + s + "'");
  }
  return v;
}

nlohmann::json matrix_to_json(const DenseMatrix& m) {
  nlohmann::json values = nlohmann::json::array();
  for (double v : m.data()) values.push_back(hexfloat(v));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

DenseMatrix matrix_from_json(const nlohmann::json& j, std::string_view path) {
  reject_unknown_keys(j, path, {"rows", "cols", "values"});
  const auto rows = get_count(j, "rows", path, 0);
  const auto cols = get_count(j, "cols", path, 0);
  auto it = j.find("values");
  if (it == j.end() || !it->is_array() || it->size() != rows * cols) {
    bad(path, "values", "expected " + std::to_string(rows * cols) + " hex-float strings");
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& v : *it) {
    if (!v.is_string()) bad(path, "values", "expected hex-float strings");
    data.push_back(parse_hexfloat(v.get<std::string>()));
  }
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace gnd::json_util
