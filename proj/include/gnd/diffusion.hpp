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
#include <span>
#include <vector>

#include "gnd/dense_matrix.hpp"
#include "gnd/graph.hpp"
#include "gnd/ops.hpp"
#include "gnd/rng.hpp"
#include "gnd/sparse_matrix.hpp"
#include "gnd/tape.hpp"

namespace gnd {

// ---------------------------------------------------------------------------
// Fixed-weight truncated diffusions: sum_{k<K} alpha_k W^k Z.
// ---------------------------------------------------------------------------

enum class ScheduleKind { kPersonalizedPageRank, kHeatKernel, kLearnedSlp };

struct DiffusionSchedule {
  ScheduleKind kind = ScheduleKind::kPersonalizedPageRank;
  double gamma = 0.9;  // teleport probability, PPR only
  double t = 5.0;      // diffusion time, heat only
  std::size_t k = 20;  // truncation order (number of hops)
  // Rescale the truncated coefficients to sum to one.
  bool renormalize = false;
};

// PPR: (1 - gamma) gamma^k. Heat: e^-t t^k / k!. Learned SLP: its uniform
// starting point 1/K. Throws InvalidParameter on out-of-range parameters.
std::vector<double> schedule_coefficients(const DiffusionSchedule& s);

DenseMatrix fixed_diffuse(const HopSequence& hops, std::span<const double> coefficients);
DenseMatrix fixed_diffuse(const HopSequence& hops, const DiffusionSchedule& s);

// ---------------------------------------------------------------------------
// Neural diffusions. Each struct owns its trainable parameters; the tape-level
// functions take already-bound Vars so a model binds each parameter once.
// ---------------------------------------------------------------------------

// One free weight per hop, initialised to 1/K.
struct SlpDiffusion {
  ad::Parameter alpha;  // 1 x K

  static SlpDiffusion uniform(std::size_t k);
  std::size_t k() const { return alpha.value.cols(); }
};

// Per (vertex, feature) MLP over the hop axis: K -> hidden (ReLU) -> 1.
struct MlpDiffusion {
  ad::Parameter layer1;  // K x hidden
  ad::Parameter layer2;  // hidden x 1

  static MlpDiffusion glorot(std::size_t k, std::size_t hidden, Rng& rng);
  std::size_t k() const { return layer1.value.rows(); }
};

// Forward-Euler unrolling of dH/dt = -W^K g(H) with g a two-layer ReLU MLP
// acting on rows of H (width -> hidden -> width) and step size 1.
struct DsDiffusion {
  static constexpr double kStepSize = 1.0;

  ad::Parameter layer1;  // width x hidden
  ad::Parameter layer2;  // hidden x width
  std::size_t k = 10;    // hops per step
  std::size_t t = 2;     // Euler steps

  static DsDiffusion glorot(std::size_t width, std::size_t hidden, std::size_t k,
                            std::size_t t, Rng& rng);
};

// Tape-recorded [Z, W Z, ..., W^(k-1) Z].
std::vector<ad::Var> hop_sequence(const SparseMatrix& w, ad::Var z, std::size_t k);

// sum_k alpha_k hops[k] (no activation).
ad::Var linear_aggregate(std::span<const ad::Var> hops, ad::Var alpha);
// ReLU(sum_k alpha_k hops[k]).
ad::Var slp_aggregate(std::span<const ad::Var> hops, ad::Var alpha);
// ReLU(unflatten(MLP(stack of flattened hops))).
ad::Var mlp_aggregate(std::span<const ad::Var> hops, ad::Var layer1, ad::Var layer2);
// H(t+1) = H(t) - W^K MLP(H(t)), H(0) = z, for `steps` steps.
ad::Var ds_evolve(ad::Var z, const SparseMatrix& w, ad::Var layer1, ad::Var layer2,
                  std::size_t k, std::size_t steps);

// Evaluation-only conveniences over plain matrices.
DenseMatrix slp_aggregate(const HopSequence& hops, const SlpDiffusion& d);
DenseMatrix mlp_aggregate(const HopSequence& hops, const MlpDiffusion& d);
DenseMatrix ds_evolve(const DenseMatrix& z, const SparseMatrix& w, const DsDiffusion& d);

}  // namespace gnd
