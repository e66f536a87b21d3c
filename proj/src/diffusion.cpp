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

#include "gnd/diffusion.hpp"

#include <cmath>
#include <string>

#include "gnd/errors.hpp"
#include "gnd/optimizer.hpp"

namespace gnd {

std::vector<double> schedule_coefficients(const DiffusionSchedule& s) {
  if (s.k < 1) throw Error(ErrorKind::kInvalidParameter, "diffusion order K must be >= 1");
  std::vector<double> alpha(s.k);
  switch (s.kind) {
    case ScheduleKind::kPersonalizedPageRank: {
      if (!(s.gamma > 0.0 && s.gamma < 1.0)) {
        throw Error(ErrorKind::kInvalidParameter,
                    "teleport probability gamma=" + std::to_string(s.gamma) + " not in (0,1)");
      }
      double power = 1.0;
      for (std::size_t k = 0; k < s.k; ++k) {
        alpha[k] = (1.0 - s.gamma) * power;
        power *= s.gamma;
      }
      break;
    }
    case ScheduleKind::kHeatKernel: {
      if (!(s.t > 0.0) || !std::isfinite(s.t)) {
        throw Error(ErrorKind::kInvalidParameter,
                    "diffusion time t=" + std::to_string(s.t) + " must be > 0");
      }
      // e^-t t^k / k! via lgamma to stay finite for large k.
      for (std::size_t k = 0; k < s.k; ++k) {
        const double kk = static_cast<double>(k);
        alpha[k] = std::exp(-s.t + kk * std::log(s.t) - std::lgamma(kk + 1.0));
      }
      break;
    }
    case ScheduleKind::kLearnedSlp:
      for (double& a : alpha) a = 1.0 / static_cast<double>(s.k);
      break;
  }
  if (s.renormalize) {
    double total = 0.0;
    for (double a : alpha) total += a;
    for (double& a : alpha) a /= total;
  }
  return alpha;
}

DenseMatrix fixed_diffuse(const HopSequence& hops, std::span<const double> coefficients) {
  if (hops.k() == 0 || hops.k() != coefficients.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::to_string(coefficients.size()) + " coefficients for " +
                    std::to_string(hops.k()) + " hops");
  }
  DenseMatrix out(hops[0].rows(), hops[0].cols());
  for (std::size_t k = 0; k < hops.k(); ++k) add_inplace(out, hops[k], coefficients[k]);
  return out;
}

DenseMatrix fixed_diffuse(const HopSequence& hops, const DiffusionSchedule& s) {
  const auto alpha = schedule_coefficients(s);
  return fixed_diffuse(hops, alpha);
}

SlpDiffusion SlpDiffusion::uniform(std::size_t k) {
  if (k < 1) throw Error(ErrorKind::kInvalidParameter, "SLP needs K >= 1");
  return SlpDiffusion{ad::Parameter(DenseMatrix(1, k, 1.0 / static_cast<double>(k)))};
}

MlpDiffusion MlpDiffusion::glorot(std::size_t k, std::size_t hidden, Rng& rng) {
  MlpDiffusion d;
  d.layer1 = ad::Parameter(ad::glorot_init(k, hidden, rng));
  d.layer2 = ad::Parameter(ad::glorot_init(hidden, 1, rng));
  return d;
}

DsDiffusion DsDiffusion::glorot(std::size_t width, std::size_t hidden, std::size_t k,
                                std::size_t t, Rng& rng) {
  DsDiffusion d;
  d.layer1 = ad::Parameter(ad::glorot_init(width, hidden, rng));
  d.layer2 = ad::Parameter(ad::glorot_init(hidden, width, rng));
  d.k = k;
  d.t = t;
  return d;
}

std::vector<ad::Var> hop_sequence(const SparseMatrix& w, ad::Var z, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::kInvalidParameter, "hop_sequence needs k >= 1");
  if (w.n_rows() != w.n_cols() || w.n_cols() != z.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "hop_sequence: operator " + std::to_string(w.n_rows()) + "x" +
                    std::to_string(w.n_cols()) + " vs signal with " +
                    std::to_string(z.rows()) + " rows");
  }
  std::vector<ad::Var> hops{z};
  hops.reserve(k);
  for (std::size_t i = 1; i < k; ++i) hops.push_back(ad::spmm(w, hops.back()));
  return hops;
}

ad::Var linear_aggregate(std::span<const ad::Var> hops, ad::Var alpha) {
  return ad::scale_by_parameter_row(alpha, hops);
}

ad::Var slp_aggregate(std::span<const ad::Var> hops, ad::Var alpha) {
  return ad::relu(linear_aggregate(hops, alpha));
}

ad::Var mlp_aggregate(std::span<const ad::Var> hops, ad::Var layer1, ad::Var layer2) {
  if (hops.empty() || layer1.rows() != hops.size() || layer2.cols() != 1 ||
      layer1.cols() != layer2.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "mlp_aggregate: " + std::to_string(hops.size()) + " hops into a " +
                    std::to_string(layer1.rows()) + "x" + std::to_string(layer1.cols()) +
                    " / " + std::to_string(layer2.rows()) + "x" +
                    std::to_string(layer2.cols()) + " MLP");
  }
  const std::size_t n = hops.front().rows();
  const std::size_t r = hops.front().cols();
  std::vector<ad::Var> flat;
  flat.reserve(hops.size());
  for (const ad::Var& h : hops) flat.push_back(ad::flatten_rows(h));
  // K x (n*r): one row per hop. Positions become rows after the transpose so
  // the MLP runs over the hop axis of every (vertex, feature) pair at once.
  ad::Var stacked = ad::transpose(ad::concat_rows(flat));
  ad::Var hidden = ad::relu(ad::matmul(stacked, layer1));
  ad::Var out = ad::matmul(hidden, layer2);  // (n*r) x 1
  return ad::relu(ad::unflatten_rows(out, n, r));
}

ad::Var ds_evolve(ad::Var z, const SparseMatrix& w, ad::Var layer1, ad::Var layer2,
                  std::size_t k, std::size_t steps) {
  if (layer1.rows() != z.cols() || layer2.rows() != layer1.cols() ||
      layer2.cols() != z.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "ds_evolve: state width " + std::to_string(z.cols()) + " with MLP " +
                    std::to_string(layer1.rows()) + "x" + std::to_string(layer1.cols()) +
                    " / " + std::to_string(layer2.rows()) + "x" +
                    std::to_string(layer2.cols()));
  }
  if (w.n_rows() != w.n_cols() || w.n_cols() != z.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "ds_evolve: operator does not match state rows");
  }
  ad::Var state = z;
  for (std::size_t step = 0; step < steps; ++step) {
    ad::Var update = ad::relu(ad::matmul(ad::relu(ad::matmul(state, layer1)), layer2));
    for (std::size_t hop = 0; hop < k; ++hop) update = ad::spmm(w, update);
    // h = 1, so the Euler step needs no scaling.
    state = ad::subtract(state, update);
  }
  return state;
}

DenseMatrix slp_aggregate(const HopSequence& hops, const SlpDiffusion& d) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& h : hops.hops) vars.push_back(tape.constant(h));
  return slp_aggregate(vars, tape.constant(d.alpha.value)).value();
}

DenseMatrix mlp_aggregate(const HopSequence& hops, const MlpDiffusion& d) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& h : hops.hops) vars.push_back(tape.constant(h));
  return mlp_aggregate(vars, tape.constant(d.layer1.value), tape.constant(d.layer2.value))
      .value();
}

DenseMatrix ds_evolve(const DenseMatrix& z, const SparseMatrix& w, const DsDiffusion& d) {
  ad::Tape tape;
  return ds_evolve(tape.constant(z), w, tape.constant(d.layer1.value),
                   tape.constant(d.layer2.value), d.k, d.t)
      .value();
}

}  // namespace gnd
