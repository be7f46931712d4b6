#include "farm/nn/tape.hpp"

#include "farm/core/error.hpp"

namespace farm::nn {

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Parameter& p) {
  const bool track = grad_enabled_ && !p.frozen;
  nodes_.push_back(Node{p.value, Matrix(), nullptr, track ? &p : nullptr, track});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, bool needs_grad, Backward fn) {
  const bool track = grad_enabled_ && needs_grad;
  nodes_.push_back(Node{std::move(value), Matrix(), track ? std::move(fn) : nullptr, nullptr, track});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Matrix& Tape::grad_buffer(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(int id, const Matrix& g) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& loss, double seed, bool flush) {
  require(loss.tape() == this, "loss belongs to a different tape");
  require(loss.value().size() == 1, "backward needs a scalar loss");
  if (!needs_grad(loss.id())) return;
  grad_buffer(loss.id())(0, 0) += seed;
  for (int id = loss.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
  }
  if (flush) flush_parameter_grads();
}

void Tape::flush_parameter_grads() {
  for (auto& n : nodes_) {
    if (n.param && n.grad.size() != 0) {
      if (n.param->grad.size() == 0) n.param->grad = Matrix::Zero(n.param->value.rows(), n.param->value.cols());
      n.param->grad += n.grad;
      n.grad.resize(0, 0);
    }
  }
}

}  // namespace farm::nn
