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

#include "gnd/tape.hpp"

#include <string>

#include "gnd/errors.hpp"

namespace gnd::ad {

Parameter::Parameter(DenseMatrix initial)
    : value(std::move(initial)),
      gradient(value.rows(), value.cols()),
      adam_m(value.rows(), value.cols()),
      adam_v(value.rows(), value.cols()) {}

void Parameter::reset_optimizer_state() {
  gradient = DenseMatrix(value.rows(), value.cols());
  adam_m = DenseMatrix(value.rows(), value.cols());
  adam_v = DenseMatrix(value.rows(), value.cols());
  step_count = 0;
}

const DenseMatrix& Var::value() const { return tape_->value(*this); }

Var Tape::constant(DenseMatrix value) {
  return record("constant", std::move(value), {}, nullptr);
}

Var Tape::parameter(Parameter& p) {
  if (p.gradient.rows() != p.value.rows() || p.gradient.cols() != p.value.cols()) {
    p.reset_optimizer_state();
  }
  Var v = record("parameter", p.value, {}, nullptr);
  nodes_.back().requires_grad = true;
  nodes_.back().param = &p;
  return v;
}

void Tape::check_owner(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw Error(ErrorKind::kInvalidParameter, "Var does not belong to this tape");
  }
}

Var Tape::record(const char* op, DenseMatrix value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(const char* op, DenseMatrix value, const std::vector<Var>& inputs,
                 BackwardFn backward) {
  if (consumed_) throw Error(ErrorKind::kInvalidParameter, "tape already consumed");
  if (!value.all_finite()) {
    throw Error(ErrorKind::kNonFiniteValue, std::string("forward value of ") + op);
  }
  bool needs_grad = false;
  for (const Var& in : inputs) {
    check_owner(in);
    needs_grad = needs_grad || nodes_[in.id_].requires_grad;
  }
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.requires_grad = needs_grad;
  if (needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(Var v, const DenseMatrix& grad) {
  if (!nodes_[v.id_].requires_grad) return;
  accumulate(v, DenseMatrix(grad));
}

void Tape::accumulate(Var v, DenseMatrix&& grad) {
  Node& node = nodes_[v.id_];
  if (!node.requires_grad) return;
  if (node.grad.empty() && !node.value.empty()) {
    if (!grad.same_shape(node.value)) {
      throw Error(ErrorKind::kDimensionMismatch,
                  std::string("gradient shape mismatch for ") + node.op);
    }
    node.grad = std::move(grad);
  } else {
    add_inplace(node.grad, grad);
  }
}

DenseMatrix Tape::gradient(Var v) const {
  check_owner(v);
  const Node& node = nodes_[v.id_];
  if (node.grad.empty()) return DenseMatrix(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss);
  if (consumed_) throw Error(ErrorKind::kInvalidParameter, "tape already consumed");
  const DenseMatrix& loss_value = nodes_[loss.id_].value;
  if (loss_value.rows() != 1 || loss_value.cols() != 1) {
    throw Error(ErrorKind::kNonScalarLoss, "loss node is " + std::to_string(loss_value.rows()) +
                                               "x" + std::to_string(loss_value.cols()));
  }
  consumed_ = true;

  for (Node& node : nodes_) {
    if (node.param != nullptr) {
      node.param->gradient = DenseMatrix(node.param->value.rows(), node.param->value.cols());
    }
  }
  accumulate(loss, DenseMatrix(1, 1, 1.0));

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) {
      node.backward(*this, node.grad);
      node.backward = nullptr;  // releases cached forward state
    }
    if (node.param != nullptr) add_inplace(node.param->gradient, node.grad);
  }
}

}  // namespace gnd::ad
