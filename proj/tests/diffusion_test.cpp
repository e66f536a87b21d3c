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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gnd/diffusion.hpp"
#include "gnd/errors.hpp"
#include "gnd/graph.hpp"
#include "oracle.hpp"

using namespace gnd;

namespace {

DiffusionSchedule ppr(double gamma, std::size_t k) {
  DiffusionSchedule s;
  s.kind = ScheduleKind::kPersonalizedPageRank;
  s.gamma = gamma;
  s.k = k;
  return s;
}

DiffusionSchedule heat(double t, std::size_t k) {
  DiffusionSchedule s;
  s.kind = ScheduleKind::kHeatKernel;
  s.t = t;
  s.k = k;
  return s;
}

std::vector<DenseMatrix> as_vector(const HopSequence& h) { return h.hops; }

// Relabels vertices: row i of the result is row perm[i] of m.
DenseMatrix permute_rows(const DenseMatrix& m, const std::vector<std::size_t>& perm) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], j);
  return out;
}

Graph permute_graph(const Graph& g, const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < g.n_vertices; ++u)
    for (auto v : g.adjacency.row_cols(u)) edges.emplace_back(inverse[u], inverse[v]);
  return Graph::from_edges(g.n_vertices, edges);
}

}  // namespace

TEST_CASE("schedule coefficients") {
  const auto p = schedule_coefficients(ppr(0.5, 3));
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 0.125);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == 0.875);

  const auto h = schedule_coefficients(heat(1.0, 3));
  CHECK(h[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(h[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(h[2] == doctest::Approx(std::exp(-1.0) / 2).epsilon(1e-15));

  for (double g : {0.1, 0.3, 0.9}) CHECK(schedule_coefficients(ppr(g, 1))[0] == 1.0 - g);

  const auto ppr20 = schedule_coefficients(ppr(0.9, 20));
  for (std::size_t k = 1; k < 20; ++k) {
    CHECK(ppr20[k] > 0.0);
    CHECK(ppr20[k] < ppr20[k - 1]);
  }
  for (double a : schedule_coefficients(heat(5.0, 40))) CHECK(a > 0.0);

  DiffusionSchedule r = ppr(0.9, 5);
  r.renormalize = true;
  const auto rn = schedule_coefficients(r);
  CHECK(std::accumulate(rn.begin(), rn.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));

  DiffusionSchedule learned;
  learned.kind = ScheduleKind::kLearnedSlp;
  learned.k = 4;
  CHECK(schedule_coefficients(learned) == std::vector<double>(4, 0.25));

  for (const auto& bad : {ppr(0.0, 3), ppr(1.0, 3), heat(0.0, 3), heat(-1.0, 3), ppr(0.5, 0)}) {
    try {
      schedule_coefficients(bad);
      FAIL("expected InvalidParameter");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidParameter);
    }
  }
}

TEST_CASE("fixed diffusion") {
  const Graph k3 = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto w = transition_matrix(add_self_loops(k3));
  const HopSequence hops = hop_sequence(w, DenseMatrix{{1}, {0}, {0}}, 2);
  const DenseMatrix out = fixed_diffuse(hops, ppr(0.5, 2));
  CHECK(out(0, 0) == doctest::Approx(0.5 + 0.25 / 3).epsilon(1e-15));
  CHECK(out(1, 0) == doctest::Approx(0.25 / 3).epsilon(1e-15));
  CHECK(out(2, 0) == doctest::Approx(0.25 / 3).epsilon(1e-15));

  const std::vector<double> one_hot{1.0, 0.0};
  CHECK(fixed_diffuse(hops, one_hot) == hops[0]);
  CHECK_THROWS_AS(fixed_diffuse(hops, ppr(0.5, 3)), Error);

  // Two schedules with numerically equal coefficient vectors agree.
  const std::vector<double> coeffs = schedule_coefficients(heat(2.0, 2));
  CHECK(fixed_diffuse(hops, coeffs) == fixed_diffuse(hops, heat(2.0, 2)));

  Rng rng(2);
  const Graph g = oracle::random_graph(8, 0.3, rng);
  const DenseMatrix wd = oracle::random_walk(g);
  const DenseMatrix z = oracle::random_dense(8, 3, rng);
  const auto s = ppr(0.7, 5);
  const auto alpha = schedule_coefficients(s);
  DenseMatrix expected(8, 3);
  const auto dense_hops = oracle::hops(wd, z, 5);
  for (std::size_t k = 0; k < 5; ++k) expected = oracle::add(expected, dense_hops[k], alpha[k]);
  CHECK(oracle::relative_error(
            fixed_diffuse(hop_sequence(transition_matrix(add_self_loops(g)), z, 5), s),
            expected) < 1e-12);
}

TEST_CASE("slp aggregation") {
  Rng rng(4);
  const Graph g = oracle::random_graph(7, 0.4, rng);
  const auto w = transition_matrix(add_self_loops(g));
  const DenseMatrix z = oracle::random_dense(7, 3, rng, 0.0, 1.0);
  const HopSequence hops = hop_sequence(w, z, 4);

  SlpDiffusion d = SlpDiffusion::uniform(4);
  CHECK(d.alpha.value == DenseMatrix(1, 4, 0.25));
  d.alpha.value = DenseMatrix{{1, 0, 0, 0}};
  CHECK(slp_aggregate(hops, d) == z);
  d.alpha.value = DenseMatrix(1, 4);
  CHECK(slp_aggregate(hops, d) == DenseMatrix(7, 3));

  for (int trial = 0; trial < 20; ++trial) {
    d.alpha.value = oracle::random_dense(1, 4, rng, -1, 1);
    const DenseMatrix zz = oracle::random_dense(7, 3, rng);
    const HopSequence hh = hop_sequence(w, zz, 4);
    CHECK(oracle::relative_error(slp_aggregate(hh, d),
                                 oracle::slp(oracle::hops(oracle::random_walk(g), zz, 4),
                                             d.alpha.value)) < 1e-12);
  }

  SUBCASE("pre-activation SLP with schedule weights equals the fixed diffusion") {
    const auto s = heat(1.5, 4);
    const auto alpha = schedule_coefficients(s);
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& h : hops.hops) vars.push_back(tape.constant(h));
    const ad::Var a = tape.constant(DenseMatrix(1, 4, alpha));
    CHECK(linear_aggregate(vars, a).value() == fixed_diffuse(hops, s));
  }
  SUBCASE("width mismatch") {
    CHECK_THROWS_AS(slp_aggregate(hops, SlpDiffusion::uniform(3)), Error);
  }
}

TEST_CASE("mlp aggregation") {
  Rng rng(6);
  const Graph g = oracle::random_graph(4, 0.6, rng);
  const auto w = transition_matrix(add_self_loops(g));

  SUBCASE("identity network on a single hop") {
    const DenseMatrix z = oracle::random_dense(4, 2, rng);
    MlpDiffusion d{ad::Parameter(DenseMatrix{{1.0}}), ad::Parameter(DenseMatrix{{1.0}})};
    // The hidden ReLU and the outer ReLU compose to ReLU(Z).
    CHECK(mlp_aggregate(hop_sequence(w, z, 1), d) == oracle::relu(z));
  }
  SUBCASE("zero weights") {
    MlpDiffusion d = MlpDiffusion::glorot(3, 32, rng);
    d.layer1.value.fill(0.0);
    d.layer2.value.fill(0.0);
    CHECK(mlp_aggregate(hop_sequence(w, oracle::random_dense(4, 2, rng), 3), d) ==
          DenseMatrix(4, 2));
  }
  SUBCASE("per-position oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const MlpDiffusion d = MlpDiffusion::glorot(3, 5, rng);
      const DenseMatrix z = oracle::random_dense(4, 2, rng);
      const HopSequence hops = hop_sequence(w, z, 3);
      CHECK(oracle::relative_error(
                mlp_aggregate(hops, d),
                oracle::mlp_per_position(as_vector(hops), d.layer1.value, d.layer2.value)) <
            1e-12);
    }
  }
  SUBCASE("a single linear unit reduces to the SLP") {
    const DenseMatrix z = oracle::random_dense(4, 3, rng, 0.0, 1.0);
    const HopSequence hops = hop_sequence(w, z, 3);
    const DenseMatrix alpha = oracle::random_dense(1, 3, rng, 0.0, 1.0);
    MlpDiffusion d{ad::Parameter(transpose(alpha)), ad::Parameter(DenseMatrix{{1.0}})};
    SlpDiffusion s{ad::Parameter(alpha)};
    CHECK(oracle::relative_error(mlp_aggregate(hops, d), slp_aggregate(hops, s)) < 1e-10);
  }
  SUBCASE("hop count mismatch") {
    const MlpDiffusion d = MlpDiffusion::glorot(2, 4, rng);
    CHECK_THROWS_AS(mlp_aggregate(hop_sequence(w, DenseMatrix(4, 2, 1.0), 3), d), Error);
  }
}

TEST_CASE("dynamical-system diffusion") {
  Rng rng(8);
  const Graph g = oracle::random_graph(5, 0.5, rng);
  const auto w = transition_matrix(add_self_loops(g));
  const DenseMatrix wd = oracle::random_walk(g);
  const DenseMatrix z = oracle::random_dense(5, 3, rng);

  DsDiffusion d = DsDiffusion::glorot(3, 2, 2, 0, rng);
  CHECK(ds_evolve(z, w, d) == z);
  d.t = 3;
  d.layer1.value.fill(0.0);
  CHECK(ds_evolve(z, w, d) == z);

  for (int trial = 0; trial < 20; ++trial) {
    const DsDiffusion r = DsDiffusion::glorot(3, 4, 2, 2, rng);
    const DenseMatrix zz = oracle::random_dense(5, 3, rng);
    CHECK(oracle::relative_error(ds_evolve(zz, w, r),
                                 oracle::ds_unroll(zz, wd, r.layer1.value, r.layer2.value, 2, 2)) <
          1e-12);
  }

  SUBCASE("scaled identity network gives a linear evolution") {
    // With l1 = I and l2 = eps I the update is eps W^K ReLU(ReLU(H)); for a
    // non-negative state that stays non-negative this is H <- (I - eps W^K) H.
    const double eps = 0.1;
    const DenseMatrix pos = oracle::random_dense(5, 3, rng, 0.5, 1.0);
    DsDiffusion lin{ad::Parameter(DenseMatrix::identity(3)),
                    ad::Parameter(oracle::scaled(DenseMatrix::identity(3), eps)), 2, 0};
    const DenseMatrix step = oracle::add(DenseMatrix::identity(5), oracle::power(wd, 2), -eps);
    for (std::size_t t = 0; t <= 3; ++t) {
      lin.t = t;
      CHECK(oracle::relative_error(ds_evolve(pos, w, lin), oracle::mul(oracle::power(step, t), pos)) <
            1e-12);
    }
  }
  SUBCASE("width mismatch") {
    const DsDiffusion bad = DsDiffusion::glorot(4, 2, 1, 1, rng);
    CHECK_THROWS_AS(ds_evolve(z, w, bad), Error);
  }
}

TEST_CASE("aggregators are permutation-equivariant") {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6 + trial % 5;
    const Graph g = oracle::random_graph(n, 0.35, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Graph pg = permute_graph(g, perm);
    const auto w = transition_matrix(add_self_loops(g));
    const auto pw = transition_matrix(add_self_loops(pg));
    const DenseMatrix z = oracle::random_dense(n, 3, rng);
    const DenseMatrix pz = permute_rows(z, perm);

    SlpDiffusion slp{ad::Parameter(oracle::random_dense(1, 4, rng))};
    CHECK(oracle::relative_error(slp_aggregate(hop_sequence(pw, pz, 4), slp),
                                 permute_rows(slp_aggregate(hop_sequence(w, z, 4), slp), perm)) <
          1e-12);
    const MlpDiffusion mlp = MlpDiffusion::glorot(4, 6, rng);
    CHECK(oracle::relative_error(mlp_aggregate(hop_sequence(pw, pz, 4), mlp),
                                 permute_rows(mlp_aggregate(hop_sequence(w, z, 4), mlp), perm)) <
          1e-12);
    const DsDiffusion ds = DsDiffusion::glorot(3, 2, 3, 2, rng);
    CHECK(oracle::relative_error(ds_evolve(pz, pw, ds), permute_rows(ds_evolve(z, w, ds), perm)) <
          1e-12);
  }
}
