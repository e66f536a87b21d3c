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
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gnd/dense_matrix.hpp"

// Strict readers for configuration objects. Every failure is an
// Error(kConfigError) whose message names the offending field path.
namespace gnd::json_util {

void require_object(const nlohmann::json& j, std::string_view path);
void reject_unknown_keys(const nlohmann::json& j, std::string_view path,
                         std::initializer_list<std::string_view> allowed);

std::size_t get_count(const nlohmann::json& j, std::string_view key, std::string_view path,
                      std::size_t fallback);
std::uint64_t get_seed(const nlohmann::json& j, std::string_view key, std::string_view path,
                       std::uint64_t fallback);
double get_real(const nlohmann::json& j, std::string_view key, std::string_view path,
                double fallback);
bool get_bool(const nlohmann::json& j, std::string_view key, std::string_view path,
              bool fallback);
std::string get_string(const nlohmann::json& j, std::string_view key, std::string_view path,
                       const std::string& fallback);
std::vector<std::size_t> get_count_list(const nlohmann::json& j, std::string_view key,
                                        std::string_view path,
                                        const std::vector<std::size_t>& fallback);

// Exact textual form of a double ("%a"), and its inverse.
std::string hexfloat(double v);
double parse_hexfloat(const std::string& s);

nlohmann::json matrix_to_json(const DenseMatrix& m);
DenseMatrix matrix_from_json(const nlohmann::json& j, std::string_view path);

}  // namespace gnd::json_util
