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

#include "gnd/optimizer.hpp"

#include <cmath>

#include "gnd/errors.hpp"

namespace gnd::ad {

void adam_step(Parameter& p, const AdamConfig& cfg) {
  if (!p.gradient.same_shape(p.value) || !p.adam_m.same_shape(p.value) ||
      !p.adam_v.same_shape(p.value)) {
    throw Error(ErrorKind::kDimensionMismatch, "parameter state shapes diverged");
  }
  ++p.step_count;
  const double t = static_cast<double>(p.step_count);
  const double m_correction = 1.0 - std::pow(cfg.beta1, t);
  const double v_correction = 1.0 - std::pow(cfg.beta2, t);

  auto value = p.value.data();
  auto grad = p.gradient.data();
  auto m = p.adam_m.data();
  auto v = p.adam_v.data();
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad[i] + 2.0 * cfg.l2 * value[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / m_correction;
    const double v_hat = v[i] / v_correction;
    value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

DenseMatrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::kInvalidParameter, "glorot_init needs a non-empty shape");
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> uniform(-limit, limit);
  DenseMatrix out(rows, cols);
  for (double& x : out.data()) x = uniform(rng);
  return out;
}

}  // namespace gnd::ad
