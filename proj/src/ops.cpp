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

#include "gnd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "gnd/errors.hpp"

namespace gnd::ad {

namespace {

Tape& tape_of(Var v) {
  if (v.tape() == nullptr) throw Error(ErrorKind::kInvalidParameter, "unbound Var");
  return *v.tape();
}

Tape& common_tape(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw Error(ErrorKind::kInvalidParameter, "operands recorded on different tapes");
  }
  return tape_of(a);
}

void require_same_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  return tape.record("matmul", gnd::matmul(a.value(), b.value()), {a, b},
                     [a, b](Tape& t, const DenseMatrix& g) {
                       if (t.requires_grad(a)) t.accumulate(a, matmul_bt(g, b.value()));
                       if (t.requires_grad(b)) t.accumulate(b, matmul_at(a.value(), g));
                     });
}

Var spmm(const SparseMatrix& m, Var x) {
  Tape& tape = tape_of(x);
  const SparseMatrix* op = &m;
  return tape.record("spmm", gnd::spmm(m, x.value()), {x},
                     [op, x](Tape& t, const DenseMatrix& g) {
                       t.accumulate(x, spmm_transposed(*op, g));
                     });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("add", a.value(), b.value());
  DenseMatrix out = a.value();
  add_inplace(out, b.value());
  return tape.record("add", std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var subtract(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("subtract", a.value(), b.value());
  DenseMatrix out = a.value();
  add_inplace(out, b.value(), -1.0);
  return tape.record("subtract", std::move(out), {a, b},
                     [a, b](Tape& t, const DenseMatrix& g) {
                       t.accumulate(a, g);
                       if (t.requires_grad(b)) {
                         DenseMatrix neg(g.rows(), g.cols());
                         add_inplace(neg, g, -1.0);
                         t.accumulate(b, std::move(neg));
                       }
                     });
}

Var multiply(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("multiply", a.value(), b.value());
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  return tape.record("multiply", std::move(out), {a, b},
                     [a, b](Tape& t, const DenseMatrix& g) {
                       auto times = [&g](const DenseMatrix& other) {
                         DenseMatrix r = g;
                         for (std::size_t i = 0; i < r.size(); ++i)
                           r.data()[i] *= other.data()[i];
                         return r;
                       };
                       if (t.requires_grad(a)) t.accumulate(a, times(b.value()));
                       if (t.requires_grad(b)) t.accumulate(b, times(a.value()));
                     });
}

Var scale(Var a, double factor) {
  Tape& tape = tape_of(a);
  DenseMatrix out = a.value();
  for (double& v : out.data()) v *= factor;
  return tape.record("scale", std::move(out), {a}, [a, factor](Tape& t, const DenseMatrix& g) {
    DenseMatrix r = g;
    for (double& v : r.data()) v *= factor;
    t.accumulate(a, std::move(r));
  });
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return tape.record("sum", DenseMatrix(1, 1, total), {a}, [a](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, DenseMatrix(a.rows(), a.cols(), g(0, 0)));
  });
}

Var scale_by_parameter_row(Var weights, std::span<const Var> terms) {
  Tape& tape = tape_of(weights);
  if (terms.empty() || weights.rows() != 1 || weights.cols() != terms.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "scale_by_parameter_row: weights 1x" + std::to_string(weights.cols()) +
                    " for " + std::to_string(terms.size()) + " terms");
  }
  const DenseMatrix& w = weights.value();
  DenseMatrix out(terms.front().rows(), terms.front().cols());
  std::vector<Var> inputs{weights};
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].tape() != &tape) {
      throw Error(ErrorKind::kInvalidParameter, "operands recorded on different tapes");
    }
    require_same_shape("scale_by_parameter_row", out, terms[k].value());
    add_inplace(out, terms[k].value(), w(0, k));
    inputs.push_back(terms[k]);
  }
  std::vector<Var> captured(terms.begin(), terms.end());
  return tape.record(
      "scale_by_parameter_row", std::move(out), inputs,
      [weights, captured](Tape& t, const DenseMatrix& g) {
        const DenseMatrix& w = weights.value();
        if (t.requires_grad(weights)) {
          DenseMatrix dw(1, captured.size());
          for (std::size_t k = 0; k < captured.size(); ++k) {
            double dot = 0.0;
            const auto term = captured[k].value().data();
            for (std::size_t i = 0; i < term.size(); ++i) dot += term[i] * g.data()[i];
            dw(0, k) = dot;
          }
          t.accumulate(weights, std::move(dw));
        }
        for (std::size_t k = 0; k < captured.size(); ++k) {
          if (!t.requires_grad(captured[k])) continue;
          DenseMatrix r(g.rows(), g.cols());
          add_inplace(r, g, w(0, k));
          t.accumulate(captured[k], std::move(r));
        }
      });
}

Var relu(Var a) {
  Tape& tape = tape_of(a);
  DenseMatrix out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return tape.record("relu", std::move(out), {a}, [a](Tape& t, const DenseMatrix& g) {
    DenseMatrix r = g;
    const auto x = a.value().data();
    for (std::size_t i = 0; i < r.size(); ++i)
      if (!(x[i] > 0.0)) r.data()[i] = 0.0;
    t.accumulate(a, std::move(r));
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorKind::kDimensionMismatch, "concat_rows of nothing");
  Tape& tape = tape_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "concat_rows: " + std::to_string(p.cols()) + " vs " + std::to_string(cols) +
                      " columns");
    }
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += p.value().size();
  }
  std::vector<Var> captured(parts.begin(), parts.end());
  return tape.record("concat_rows", std::move(out), captured,
                     [captured](Tape& t, const DenseMatrix& g) {
                       std::size_t off = 0;
                       for (const Var& p : captured) {
                         const std::size_t n = p.value().size();
                         if (t.requires_grad(p)) {
                           auto begin = g.data().begin() + static_cast<std::ptrdiff_t>(off);
                           t.accumulate(p, DenseMatrix(p.rows(), p.cols(),
                                                       std::vector<double>(begin, begin + n)));
                         }
                         off += n;
                       }
                     });
}

Var flatten_rows(Var a) { return unflatten_rows(a, 1, a.value().size()); }

Var unflatten_rows(Var a, std::size_t rows, std::size_t cols) {
  Tape& tape = tape_of(a);
  if (rows * cols != a.value().size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "reshape of " + std::to_string(a.value().size()) + " entries to " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  const auto data = a.value().data();
  return tape.record("reshape",
                     DenseMatrix(rows, cols, std::vector<double>(data.begin(), data.end())),
                     {a}, [a](Tape& t, const DenseMatrix& g) {
                       t.accumulate(a, DenseMatrix(a.rows(), a.cols(),
                                                   std::vector<double>(g.data().begin(),
                                                                       g.data().end())));
                     });
}

Var transpose(Var a) {
  Tape& tape = tape_of(a);
  return tape.record("transpose", gnd::transpose(a.value()), {a},
                     [a](Tape& t, const DenseMatrix& g) { t.accumulate(a, gnd::transpose(g)); });
}

Var dropout(Var a, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "dropout rate " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;
  Tape& tape = tape_of(a);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto mask = std::make_shared<std::vector<double>>(a.value().size());
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = uniform(rng) >= rate ? keep_scale : 0.0;
    out.data()[i] *= (*mask)[i];
  }
  return tape.record("dropout", std::move(out), {a}, [a, mask](Tape& t, const DenseMatrix& g) {
    DenseMatrix r = g;
    for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] *= (*mask)[i];
    t.accumulate(a, std::move(r));
  });
}

Var masked_softmax_cross_entropy(Var logits, std::span<const int> labels,
                                 std::span<const std::size_t> rows) {
  Tape& tape = tape_of(logits);
  if (rows.empty()) throw Error(ErrorKind::kEmptyMask, "cross-entropy over no vertices");
  const DenseMatrix& z = logits.value();
  if (labels.size() != z.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::to_string(labels.size()) + " labels for " + std::to_string(z.rows()) +
                    " logit rows");
  }
  const double log_floor = std::log(kLogClamp);
  const double inv_count = 1.0 / static_cast<double>(rows.size());
  // Per masked row: softmax probabilities, or an empty row when clamped.
  auto grad_rows = std::make_shared<DenseMatrix>(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t i : rows) {
    if (i >= z.rows()) throw Error(ErrorKind::kDimensionMismatch, "mask index out of range");
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= z.cols()) {
      throw Error(ErrorKind::kUnknownLabel, "masked vertex " + std::to_string(i) +
                                                " has label " + std::to_string(y));
    }
    auto r = z.row(i);
    const double peak = *std::max_element(r.begin(), r.end());
    double denom = 0.0;
    for (double v : r) denom += std::exp(v - peak);
    const double log_p = r[static_cast<std::size_t>(y)] - peak - std::log(denom);
    auto gr = grad_rows->row(i);
    if (log_p >= log_floor) {
      total -= log_p;
      for (std::size_t c = 0; c < r.size(); ++c) gr[c] += std::exp(r[c] - peak) / denom;
      gr[static_cast<std::size_t>(y)] -= 1.0;
      for (double& v : gr) v *= inv_count;
    } else {
      total -= log_floor;  // clamped: flat, zero gradient
    }
  }
  return tape.record("softmax_cross_entropy", DenseMatrix(1, 1, total * inv_count), {logits},
                     [logits, grad_rows](Tape& t, const DenseMatrix& g) {
                       DenseMatrix r = *grad_rows;
                       for (double& v : r.data()) v *= g(0, 0);
                       t.accumulate(logits, std::move(r));
                     });
}

Var l2_penalty(std::span<const Var> params, double factor) {
  if (params.empty()) throw Error(ErrorKind::kDimensionMismatch, "l2_penalty of nothing");
  Tape& tape = tape_of(params.front());
  double total = 0.0;
  for (const Var& p : params)
    for (double v : p.value().data()) total += v * v;
  std::vector<Var> captured(params.begin(), params.end());
  return tape.record("l2_penalty", DenseMatrix(1, 1, factor * total), captured,
                     [captured, factor](Tape& t, const DenseMatrix& g) {
                       for (const Var& p : captured) {
                         if (!t.requires_grad(p)) continue;
                         DenseMatrix r(p.rows(), p.cols());
                         add_inplace(r, p.value(), 2.0 * factor * g(0, 0));
                         t.accumulate(p, std::move(r));
                       }
                     });
}

}  // namespace gnd::ad
