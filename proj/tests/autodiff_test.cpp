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

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gnd/errors.hpp"
#include "gnd/graph.hpp"
#include "gnd/ops.hpp"
#include "gnd/optimizer.hpp"
#include "gnd/tape.hpp"
#include "oracle.hpp"

using namespace gnd;
using ad::Parameter;
using ad::Tape;
using ad::Var;

namespace {

// Scalar probe: sum(op(inputs) * weights) with fixed random weights, so every
// output entry contributes a distinct sensitivity.
using OpFn = std::function<Var(Tape&, std::vector<Var>&)>;

double probe_loss(const OpFn& op, std::vector<Parameter>& params, const DenseMatrix& weights,
                  bool backward) {
  Tape tape;
  std::vector<Var> vars;
  for (auto& p : params) vars.push_back(tape.parameter(p));
  const Var out = op(tape, vars);
  const Var loss = ad::sum(ad::multiply(out, tape.constant(weights)));
  if (backward) tape.backward(loss);
  return loss.value()(0, 0);
}

// Worst finite-difference error over all inputs of `op`.
double op_gradient_error(const OpFn& op, std::vector<DenseMatrix> inputs, std::uint64_t seed) {
  std::vector<Parameter> params;
  for (auto& m : inputs) params.emplace_back(std::move(m));
  DenseMatrix out_shape;
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : params) vars.push_back(tape.parameter(p));
    out_shape = op(tape, vars).value();
  }
  Rng rng(seed);
  const DenseMatrix weights = oracle::random_dense(out_shape.rows(), out_shape.cols(), rng);
  probe_loss(op, params, weights, true);
  double worst = 0.0;
  for (auto& p : params) {
    const DenseMatrix analytic = p.gradient;
    auto f = [&] { return probe_loss(op, params, weights, false); };
    worst = std::max(worst, oracle::finite_difference_error(f, p.value, analytic));
  }
  return worst;
}

// Values bounded away from zero so ReLU kinks do not disturb differences.
DenseMatrix away_from_zero(std::size_t r, std::size_t c, Rng& rng) {
  DenseMatrix m = oracle::random_dense(r, c, rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (double& v : m.data())
    if (sign(rng)) v = -v;
  return m;
}

}  // namespace

TEST_CASE("forward values") {
  Tape tape;
  const Var x = tape.constant(DenseMatrix{{-1, 0, 2}});
  CHECK(ad::relu(x).value() == DenseMatrix{{0, 0, 2}});

  const Var m = tape.constant(DenseMatrix{{1, 2}, {3, 4}});
  const Var flat = ad::flatten_rows(m);
  CHECK(flat.value() == DenseMatrix{{1, 2, 3, 4}});
  CHECK(ad::unflatten_rows(flat, 2, 2).value() == m.value());
  CHECK(ad::transpose(m).value() == DenseMatrix{{1, 3}, {2, 4}});

  const Var parts[] = {m, x.tape()->constant(DenseMatrix{{5, 6}})};
  CHECK(ad::concat_rows(parts).value() == DenseMatrix{{1, 2}, {3, 4}, {5, 6}});

  const Var terms[] = {m, m};
  CHECK(ad::scale_by_parameter_row(tape.constant(DenseMatrix{{2, -1}}), terms).value() ==
        m.value());
  CHECK(ad::sum(m).value()(0, 0) == 10);
  CHECK(ad::scale(m, 0.5).value() == DenseMatrix{{0.5, 1}, {1.5, 2}});
  CHECK(ad::subtract(m, m).value() == DenseMatrix(2, 2));
}

TEST_CASE("shape and value errors") {
  Tape tape;
  const Var a = tape.constant(DenseMatrix(2, 3));
  const Var b = tape.constant(DenseMatrix(2, 2));
  CHECK_THROWS_AS(ad::matmul(a, a), Error);
  CHECK_THROWS_AS(ad::add(a, b), Error);
  CHECK_THROWS_AS(ad::unflatten_rows(a, 4, 2), Error);
  const Var huge = tape.constant(DenseMatrix{{1e300}});
  try {
    ad::multiply(huge, huge);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonFiniteValue);
  }
  try {
    tape.backward(a);
    FAIL("expected NonScalarLoss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonScalarLoss);
  }
  Rng rng(1);
  CHECK_THROWS_AS(ad::dropout(a, 1.0, true, rng), Error);
  CHECK_THROWS_AS(ad::dropout(a, -0.1, true, rng), Error);
}

TEST_CASE("softmax cross-entropy") {
  Tape tape;
  const Var logits = tape.constant(DenseMatrix(3, 4, 0.7));
  const std::vector<int> labels{0, 3, 2};
  const std::vector<std::size_t> rows{0, 1, 2};
  CHECK(ad::masked_softmax_cross_entropy(logits, labels, rows).value()(0, 0) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(ad::masked_softmax_cross_entropy(logits, labels, std::vector<std::size_t>{}),
                  Error);
  const std::vector<int> unlabeled{0, -1, 2};
  CHECK_THROWS_AS(ad::masked_softmax_cross_entropy(logits, unlabeled, rows), Error);

  SUBCASE("gradient of the logits is softmax minus one-hot") {
    Tape t;
    Parameter z(DenseMatrix{{0.3, -1.2, 2.0}});
    const Var theta = t.constant(DenseMatrix::identity(3));
    const std::vector<int> y{1};
    const std::vector<std::size_t> r{0};
    t.backward(ad::masked_softmax_cross_entropy(ad::matmul(t.parameter(z), theta), y, r));
    DenseMatrix expected = oracle::softmax(z.value);
    expected(0, 1) -= 1.0;
    CHECK(oracle::relative_error(z.gradient, expected) < 1e-14);
  }
  SUBCASE("cross-entropy is non-negative and softmax rows sum to one") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      Tape t;
      const DenseMatrix l = oracle::random_dense(5, 3, rng, -20, 20);
      const std::vector<int> y{0, 1, 2, 1, 0};
      const std::vector<std::size_t> r{0, 2, 4};
      CHECK(ad::masked_softmax_cross_entropy(t.constant(l), y, r).value()(0, 0) >= 0.0);
      const DenseMatrix s = softmax_rows(l);
      for (std::size_t row = 0; row < 5; ++row) {
        double total = 0.0;
        for (double v : s.row(row)) total += v;
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
  }
  SUBCASE("saturated predictions are clamped") {
    Tape t;
    Parameter z(DenseMatrix{{0.0, 800.0}});
    const std::vector<int> y{0};
    const std::vector<std::size_t> r{0};
    const Var loss = ad::masked_softmax_cross_entropy(t.parameter(z), y, r);
    CHECK(loss.value()(0, 0) == doctest::Approx(-std::log(ad::kLogClamp)));
    t.backward(loss);
    CHECK(max_abs(z.gradient) == 0.0);
  }
}

TEST_CASE("backward basics") {
  SUBCASE("sum of squares") {
    Tape tape;
    Parameter x(DenseMatrix{{3.0}});
    const Var v = tape.parameter(x);
    tape.backward(ad::sum(ad::multiply(v, v)));
    CHECK(x.gradient(0, 0) == 6.0);
    CHECK(tape.consumed());
    CHECK_THROWS_AS(tape.backward(ad::sum(v)), Error);
  }
  SUBCASE("unreachable parameters get zero gradients") {
    Tape tape;
    Parameter used(DenseMatrix{{2.0}});
    Parameter unused(DenseMatrix{{5.0}});
    unused.gradient(0, 0) = 42.0;
    const Var u = tape.parameter(used);
    tape.parameter(unused);
    tape.backward(ad::sum(u));
    CHECK(used.gradient(0, 0) == 1.0);
    CHECK(unused.gradient(0, 0) == 0.0);
  }
  SUBCASE("a parameter used twice accumulates") {
    Tape tape;
    Parameter x(DenseMatrix{{1.5, -2.0}});
    const Var v = tape.parameter(x);
    tape.backward(ad::sum(ad::add(ad::scale(v, 3.0), v)));
    CHECK(x.gradient == DenseMatrix{{4.0, 4.0}});
  }
  SUBCASE("vars from another tape are rejected") {
    Tape a, b;
    const Var x = a.constant(DenseMatrix{{1.0}});
    const Var y = b.constant(DenseMatrix{{1.0}});
    CHECK_THROWS_AS(ad::add(x, y), Error);
  }
  SUBCASE("l2 penalty gradient is 2 * l2 * value") {
    Tape tape;
    Parameter w(DenseMatrix{{1.0, -2.0}, {0.5, 3.0}});
    const Var params[] = {tape.parameter(w)};
    const Var pen = ad::l2_penalty(params, 5e-4);
    CHECK(pen.value()(0, 0) == doctest::Approx(5e-4 * (1 + 4 + 0.25 + 9)));
    tape.backward(pen);
    for (std::size_t i = 0; i < 4; ++i) CHECK(w.gradient.data()[i] == 2 * 5e-4 * w.value.data()[i]);
  }
}

TEST_CASE("every op passes a finite-difference check") {
  Rng rng(2024);
  const Graph g = oracle::random_graph(6, 0.4, rng);
  const SparseMatrix w = transition_matrix(add_self_loops(g));
  for (int trial = 0; trial < 5; ++trial) {
    const std::uint64_t seed = 100 + trial;
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::matmul(v[0], v[1]); },
                            {oracle::random_dense(3, 4, rng), oracle::random_dense(4, 2, rng)},
                            seed) < 1e-6);
    CHECK(op_gradient_error([&](Tape&, auto& v) { return ad::spmm(w, v[0]); },
                            {oracle::random_dense(6, 3, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::add(v[0], v[1]); },
                            {oracle::random_dense(2, 3, rng), oracle::random_dense(2, 3, rng)},
                            seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::subtract(v[0], v[1]); },
                            {oracle::random_dense(2, 3, rng), oracle::random_dense(2, 3, rng)},
                            seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::multiply(v[0], v[1]); },
                            {oracle::random_dense(2, 3, rng), oracle::random_dense(2, 3, rng)},
                            seed) < 1e-6);
    CHECK(op_gradient_error(
              [](Tape&, auto& v) {
                const Var terms[] = {v[1], v[2], v[3]};
                return ad::scale_by_parameter_row(v[0], terms);
              },
              {oracle::random_dense(1, 3, rng), oracle::random_dense(4, 2, rng),
               oracle::random_dense(4, 2, rng), oracle::random_dense(4, 2, rng)},
              seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::relu(v[0]); },
                            {away_from_zero(3, 3, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error(
              [](Tape&, auto& v) {
                const Var parts[] = {v[0], v[1]};
                return ad::concat_rows(parts);
              },
              {oracle::random_dense(2, 3, rng), oracle::random_dense(1, 3, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::flatten_rows(v[0]); },
                            {oracle::random_dense(3, 2, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::unflatten_rows(v[0], 2, 3); },
                            {oracle::random_dense(1, 6, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error([](Tape&, auto& v) { return ad::transpose(v[0]); },
                            {oracle::random_dense(3, 2, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error(
              [](Tape&, auto& v) {
                Rng mask_rng(5);  // same mask on every evaluation
                return ad::dropout(v[0], 0.5, true, mask_rng);
              },
              {oracle::random_dense(4, 4, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error(
              [](Tape&, auto& v) {
                const std::vector<int> labels{2, 0, 1, 1};
                const std::vector<std::size_t> rows{0, 1, 3};
                return ad::masked_softmax_cross_entropy(v[0], labels, rows);
              },
              {oracle::random_dense(4, 3, rng)}, seed) < 1e-6);
    CHECK(op_gradient_error(
              [](Tape&, auto& v) {
                const Var params[] = {v[0], v[1]};
                return ad::l2_penalty(params, 0.3);
              },
              {oracle::random_dense(2, 2, rng), oracle::random_dense(3, 1, rng)}, seed) < 1e-6);
  }
}

TEST_CASE("dropout") {
  Rng rng(17);
  Tape tape;
  const Var x = tape.constant(DenseMatrix(100, 100, 2.0));
  SUBCASE("evaluation mode is the identity") {
    const Var y = ad::dropout(x, 0.6, false, rng);
    CHECK(y.id() == x.id());
    CHECK(ad::dropout(x, 0.0, true, rng).id() == x.id());
  }
  SUBCASE("inverted scaling keeps the expectation") {
    const Var y = ad::dropout(x, 0.6, true, rng);
    double total = 0.0;
    std::size_t zeros = 0;
    for (double v : y.value().data()) {
      total += v;
      if (v == 0.0) ++zeros;
      else CHECK(v == doctest::Approx(2.0 / 0.4));
    }
    CHECK(total / 1e4 == doctest::Approx(2.0).epsilon(0.02));
    CHECK(static_cast<double>(zeros) / 1e4 == doctest::Approx(0.6).epsilon(0.05));
  }
  SUBCASE("same seed gives the same mask") {
    Rng a(3), b(3);
    CHECK(ad::dropout(x, 0.5, true, a).value() == ad::dropout(x, 0.5, true, b).value());
  }
}

TEST_CASE("tape replay is deterministic") {
  auto run = [](DenseMatrix& grad_out) {
    Rng rng(99);
    Parameter w(oracle::random_dense(4, 3, rng));
    const DenseMatrix x = oracle::random_dense(5, 4, rng);
    Tape tape;
    Rng drop(7);
    const Var h = ad::dropout(ad::matmul(tape.constant(x), tape.parameter(w)), 0.5, true, drop);
    const std::vector<int> y{0, 1, 2, 0, 1};
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    const Var loss = ad::masked_softmax_cross_entropy(ad::relu(h), y, rows);
    tape.backward(loss);
    grad_out = w.gradient;
    return loss.value()(0, 0);
  };
  DenseMatrix g1, g2;
  const double l1 = run(g1);
  const double l2 = run(g2);
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("adam") {
  ad::AdamConfig cfg;
  SUBCASE("first step moves by about lr") {
    Parameter p(DenseMatrix{{1.0}});
    p.gradient(0, 0) = 0.1;
    ad::adam_step(p, cfg);
    CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.005 * 0.1 / (0.1 + 1e-8)).epsilon(1e-14));
    CHECK(p.step_count == 1);
  }
  SUBCASE("zero gradient leaves the value alone") {
    Parameter p(DenseMatrix{{1.0, -3.0}});
    ad::adam_step(p, cfg);
    CHECK(p.value == DenseMatrix{{1.0, -3.0}});
  }
  SUBCASE("first step is bounded by lr") {
    Rng rng(4);
    Parameter p(oracle::random_dense(10, 10, rng));
    const DenseMatrix before = p.value;
    p.gradient = oracle::random_dense(10, 10, rng, -100, 100);
    ad::adam_step(p, cfg);
    CHECK(max_abs_difference(p.value, before) <= cfg.lr * (1 + 1e-6));
  }
  SUBCASE("weight decay enters the gradient") {
    Parameter a(DenseMatrix{{2.0}});
    Parameter b(DenseMatrix{{2.0}});
    a.gradient(0, 0) = 0.3;
    b.gradient(0, 0) = 0.3 + 2 * 0.01 * 2.0;
    ad::AdamConfig decay = cfg;
    decay.l2 = 0.01;
    for (int i = 0; i < 3; ++i) {
      ad::adam_step(a, decay);
      ad::adam_step(b, cfg);
      a.gradient(0, 0) = 0.3;
      b.gradient(0, 0) = 0.3 + 2 * 0.01 * b.value(0, 0);
    }
    CHECK(a.value(0, 0) == b.value(0, 0));
  }
  SUBCASE("matches a scalar reference over several steps") {
    Parameter p(DenseMatrix{{0.5}});
    double x = 0.5, m = 0.0, v = 0.0;
    for (int t = 1; t <= 10; ++t) {
      const double g = std::sin(t) + 0.2 * x;
      p.gradient(0, 0) = g;
      ad::adam_step(p, cfg);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mh = m / (1 - std::pow(0.9, t));
      const double vh = v / (1 - std::pow(0.999, t));
      x -= 0.005 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(p.value(0, 0) == doctest::Approx(x).epsilon(1e-13));
    }
  }
}

TEST_CASE("glorot initialisation") {
  Rng a(1), b(1);
  const DenseMatrix one = ad::glorot_init(1, 1, a);
  CHECK(std::abs(one(0, 0)) <= std::sqrt(3.0));
  a.seed(8);
  b.seed(8);
  CHECK(ad::glorot_init(5, 7, a) == ad::glorot_init(5, 7, b));
  Rng rng(12345);
  const DenseMatrix big = ad::glorot_init(100, 100, rng);
  double mean = 0.0;
  for (double v : big.data()) mean += v;
  mean /= static_cast<double>(big.size());
  CHECK(std::abs(mean) < 0.02);
  CHECK(max_abs(big) <= std::sqrt(6.0 / 200.0));
  CHECK_THROWS_AS(ad::glorot_init(0, 3, rng), Error);
}
