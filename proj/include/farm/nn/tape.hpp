#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "farm/nn/parameters.hpp"
#include "farm/nn/tensor.hpp"

namespace farm::nn {

class Tape;

/// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode recorder. Nodes are appended in evaluation order and
/// backward() walks them in reverse, accumulating into parameter grads.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter& p);
  /// Records an op result; fn runs during backward when the node has a gradient.
  Var record(Matrix value, bool needs_grad, Backward fn);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool needs_grad(const Var& v) const { return needs_grad(v.id()); }
  bool grad_enabled() const { return grad_enabled_; }

  /// Adds g into the gradient of node id (no-op for constants).
  void accumulate(int id, const Matrix& g);
  /// Mutable, zero-initialized gradient buffer of node id.
  Matrix& grad_buffer(int id);
  const Matrix& grad(const Var& v) const { return nodes_[static_cast<std::size_t>(v.id())].grad; }

  /// Seeds d(loss)/d(loss) = seed for a 1x1 loss and propagates. With flush unset,
  /// parameter gradients stay on the tape until flush_parameter_grads().
  void backward(const Var& loss, double seed = 1.0, bool flush = true);
  void flush_parameter_grads();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  std::deque<Node> nodes_;
  bool grad_enabled_;
};

}  // namespace farm::nn
