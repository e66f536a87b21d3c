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
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "gnd/dense_matrix.hpp"

namespace gnd::ad {

// A trainable matrix together with its gradient and Adam moments.
struct Parameter {
  Parameter() = default;
  explicit Parameter(DenseMatrix initial);

  DenseMatrix value;
  DenseMatrix gradient;
  DenseMatrix adam_m;
  DenseMatrix adam_v;
  std::size_t step_count = 0;

  void zero_grad() { gradient.fill(0.0); }
  // Resets moments and step count; value is kept.
  void reset_optimizer_state();
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const DenseMatrix& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Append-only record of a forward computation. Nodes are stored in creation
// order, which is a topological order because an op can only consume Vars that
// already exist. backward() sweeps the nodes once in reverse.
//
// A tape is single-threaded and single-use: one training step owns one tape.
// Constant operands captured by reference (sparse operators) must outlive it.
class Tape {
 public:
  // Receives the accumulated gradient of the node's output.
  using BackwardFn = std::function<void(Tape&, const DenseMatrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(DenseMatrix value);
  // Leaf bound to p. backward() writes d(loss)/d(p.value) into p.gradient.
  Var parameter(Parameter& p);

  const DenseMatrix& value(Var v) const { return nodes_[v.id_].value; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  // Gradient reached by v during the last backward pass (zeros if none).
  DenseMatrix gradient(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Runs reverse-mode accumulation from a 1x1 loss node. Every parameter bound
  // to this tape gets its gradient overwritten (zero when unreachable). The
  // tape can not be replayed afterwards.
  void backward(Var loss);

  // For op implementations: records a node. Throws NonFiniteValue when the
  // forward value contains NaN or Inf. The backward closure is dropped when no
  // input requires a gradient.
  Var record(const char* op, DenseMatrix value, std::initializer_list<Var> inputs,
             BackwardFn backward);
  Var record(const char* op, DenseMatrix value, const std::vector<Var>& inputs,
             BackwardFn backward);
  // Adds grad into v's accumulator when v requires a gradient.
  void accumulate(Var v, const DenseMatrix& grad);
  void accumulate(Var v, DenseMatrix&& grad);

 private:
  struct Node {
    const char* op = "";
    DenseMatrix value;
    DenseMatrix grad;  // empty until something flows in
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  void check_owner(Var v) const;

  // A deque keeps value() references valid while later ops append nodes.
  std::deque<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace gnd::ad
