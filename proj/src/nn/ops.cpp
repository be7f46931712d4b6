#include "farm/nn/ops.hpp"

#include <cmath>

#include "farm/core/error.hpp"

namespace farm::nn {
namespace {

Tape& tape_of(const Var& a) {
  require(a.valid(), "operation on an empty variable");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  require(a.valid() && b.valid() && a.tape() == b.tape(), "operands belong to different tapes");
  return *a.tape();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

void require_row(const Matrix& a, const Matrix& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw InvalidArgument(std::string(op) + ": expected a 1 x C row");
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix out = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ia)) tp.grad_buffer(ia).noalias() += g * tp.value(ib).transpose();
    if (tp.needs_grad(ib)) tp.grad_buffer(ib).noalias() += tp.value(ia).transpose() * g;
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  Tape& t = tape_of(x, weight);
  require(x.cols() == weight.rows(), "linear: input width does not match weight rows");
  require(bias.rows() == 1 && bias.cols() == weight.cols(), "linear: bias must be 1 x out");
  Matrix out(x.rows(), weight.cols());
  out.noalias() = x.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  const int ix = x.id(), iw = weight.id(), ib = bias.id();
  const bool track = t.needs_grad(x) || t.needs_grad(weight) || t.needs_grad(bias);
  return t.record(std::move(out), track, [ix, iw, ib](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) tp.grad_buffer(ix).noalias() += g * tp.value(iw).transpose();
    if (tp.needs_grad(iw)) tp.grad_buffer(iw).noalias() += tp.value(ix).transpose() * g;
    if (tp.needs_grad(ib)) tp.grad_buffer(ib) += g.colwise().sum();
  });
}

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.needs_grad(ib)) tp.grad_buffer(ib) -= g;
  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), t.needs_grad(a) || t.needs_grad(b),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.needs_grad(ia)) tp.grad_buffer(ia) += g.cwiseProduct(tp.value(ib));
                    if (tp.needs_grad(ib)) tp.grad_buffer(ib) += g.cwiseProduct(tp.value(ia));
                  });
}

Var scale(const Var& a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record(a.value() * s, t.needs_grad(a), [ia, s](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ia)) tp.grad_buffer(ia) += g * s;
  });
}

Var add_row(const Var& a, const Var& row) {
  Tape& t = tape_of(a, row);
  require_row(a.value(), row.value(), "add_row");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  const int ia = a.id(), ir = row.id();
  return t.record(std::move(out), t.needs_grad(a) || t.needs_grad(row), [ia, ir](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.needs_grad(ir)) tp.grad_buffer(ir) += g.colwise().sum();
  });
}

Var mul_row(const Var& a, const Var& row) {
  Tape& t = tape_of(a, row);
  require_row(a.value(), row.value(), "mul_row");
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  const int ia = a.id(), ir = row.id();
  return t.record(std::move(out), t.needs_grad(a) || t.needs_grad(row), [ia, ir](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ia)) tp.grad_buffer(ia).array() += g.array().rowwise() * tp.value(ir).row(0).array();
    if (tp.needs_grad(ir)) tp.grad_buffer(ir) += g.cwiseProduct(tp.value(ia)).colwise().sum();
  });
}

Var modulate(const Var& x, const Var& shift, const Var& scale_row) {
  Tape& t = tape_of(x, shift);
  require_row(x.value(), shift.value(), "modulate shift");
  require_row(x.value(), scale_row.value(), "modulate scale");
  Matrix out = x.value().array().rowwise() * (scale_row.value().row(0).array() + 1.0);
  out.rowwise() += shift.value().row(0);
  const int ix = x.id(), ish = shift.id(), isc = scale_row.id();
  const bool track = t.needs_grad(x) || t.needs_grad(shift) || t.needs_grad(scale_row);
  return t.record(std::move(out), track, [ix, ish, isc](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) {
      tp.grad_buffer(ix).array() += g.array().rowwise() * (tp.value(isc).row(0).array() + 1.0);
    }
    if (tp.needs_grad(ish)) tp.grad_buffer(ish) += g.colwise().sum();
    if (tp.needs_grad(isc)) tp.grad_buffer(isc) += g.cwiseProduct(tp.value(ix)).colwise().sum();
  });
}

Var rms_norm(const Var& x, double eps) {
  Tape& t = tape_of(x);
  const Matrix& v = x.value();
  const double d = static_cast<double>(v.cols());
  Eigen::VectorXd inv_rms = ((v.array().square().rowwise().sum() / d) + eps).rsqrt();
  Matrix out = v.array().colwise() * inv_rms.array();
  const int ix = x.id();
  const int iy = static_cast<int>(t.size());
  return t.record(std::move(out), t.needs_grad(x), [ix, iy, inv_rms, d](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    const Matrix& y = tp.value(iy);
    const Eigen::VectorXd gy = g.cwiseProduct(y).rowwise().sum() / d;
    Matrix gx = (g.array() - y.array().colwise() * gy.array()).colwise() * inv_rms.array();
    tp.grad_buffer(ix) += gx;
  });
}

Var layer_norm(const Var& x, double eps) {
  Tape& t = tape_of(x);
  const Matrix& v = x.value();
  const double d = static_cast<double>(v.cols());
  const Eigen::VectorXd mean = v.rowwise().sum() / d;
  Matrix centered = v.colwise() - mean;
  Eigen::VectorXd inv_std = ((centered.array().square().rowwise().sum() / d) + eps).rsqrt();
  Matrix out = centered.array().colwise() * inv_std.array();
  const int ix = x.id();
  const int iy = static_cast<int>(t.size());
  return t.record(std::move(out), t.needs_grad(x), [ix, iy, inv_std, d](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    const Matrix& y = tp.value(iy);
    const Eigen::VectorXd g_mean = g.rowwise().sum() / d;
    const Eigen::VectorXd gy_mean = g.cwiseProduct(y).rowwise().sum() / d;
    Matrix gx = ((g.colwise() - g_mean).array() - y.array().colwise() * gy_mean.array()).colwise() * inv_std.array();
    tp.grad_buffer(ix) += gx;
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;
}  // namespace

Var gelu(const Var& x) {
  Tape& t = tape_of(x);
  const double c = kGeluC;
  const double k = kGeluK;
  const auto& v = x.value().array();
  Matrix th = (c * (v + k * v.cube())).tanh().matrix();
  Matrix out = (0.5 * v * (1.0 + th.array())).matrix();
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix, th = std::move(th)](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    const auto& v = tp.value(ix).array();
    const double c = kGeluC;
    const double k = kGeluK;
    const auto d = 0.5 * (1.0 + th.array()) +
                   0.5 * v * (1.0 - th.array().square()) * c * (1.0 + 3.0 * k * v.square());
    tp.grad_buffer(ix).array() += g.array() * d;
  });
}

Var silu(const Var& x) {
  Tape& t = tape_of(x);
  Matrix sig = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  Matrix out = x.value().cwiseProduct(sig);
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix, sig = std::move(sig)](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    const auto& v = tp.value(ix).array();
    tp.grad_buffer(ix).array() += g.array() * sig.array() * (1.0 + v * (1.0 - sig.array()));
  });
}

namespace {

void softmax_inplace(Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

}  // namespace

Var softmax_rows(const Var& x) {
  Tape& t = tape_of(x);
  Matrix out = x.value();
  softmax_inplace(out);
  const int ix = x.id();
  const int iy = static_cast<int>(t.size());
  return t.record(std::move(out), t.needs_grad(x), [ix, iy](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    const Matrix& p = tp.value(iy);
    const Eigen::VectorXd dot = g.cwiseProduct(p).rowwise().sum();
    tp.grad_buffer(ix) += ((g.colwise() - dot).cwiseProduct(p));
  });
}

Var rope(const Var& x, const Matrix& cos_pairs, const Matrix& sin_pairs) {
  Tape& t = tape_of(x);
  const Matrix& v = x.value();
  require(v.cols() % 2 == 0, "rope: feature width must be even");
  require(cos_pairs.rows() == v.rows() && cos_pairs.cols() == v.cols() / 2 && sin_pairs.rows() == v.rows() &&
              sin_pairs.cols() == v.cols() / 2,
          "rope: phase table shape must be N x D/2");
  Matrix out(v.rows(), v.cols());
  for (Index i = 0; i < v.rows(); ++i) {
    for (Index j = 0; j < v.cols() / 2; ++j) {
      const double c = cos_pairs(i, j), s = sin_pairs(i, j);
      const double a = v(i, 2 * j), b = v(i, 2 * j + 1);
      out(i, 2 * j) = a * c - b * s;
      out(i, 2 * j + 1) = b * c + a * s;
    }
  }
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix, cos_pairs, sin_pairs](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    Matrix& gx = tp.grad_buffer(ix);
    for (Index i = 0; i < g.rows(); ++i) {
      for (Index j = 0; j < g.cols() / 2; ++j) {
        const double c = cos_pairs(i, j), s = sin_pairs(i, j);
        const double ga = g(i, 2 * j), gb = g(i, 2 * j + 1);
        gx(i, 2 * j) += ga * c + gb * s;
        gx(i, 2 * j + 1) += gb * c - ga * s;
      }
    }
  });
}

Var slice_cols(const Var& x, Index start, Index count) {
  Tape& t = tape_of(x);
  require(start >= 0 && count >= 0 && start + count <= x.cols(), "slice_cols: range out of bounds");
  const int ix = x.id();
  return t.record(x.value().middleCols(start, count), t.needs_grad(x), [ix, start, count](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) tp.grad_buffer(ix).middleCols(start, count) += g;
  });
}

Var slice_rows(const Var& x, Index start, Index count) {
  Tape& t = tape_of(x);
  require(start >= 0 && count >= 0 && start + count <= x.rows(), "slice_rows: range out of bounds");
  const int ix = x.id();
  return t.record(x.value().middleRows(start, count), t.needs_grad(x), [ix, start, count](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) tp.grad_buffer(ix).middleRows(start, count) += g;
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  Tape& t = tape_of(parts.front());
  Index rows = 0;
  const Index cols = parts.front().cols();
  bool track = false;
  for (const auto& p : parts) {
    require(p.tape() == &t && p.cols() == cols, "concat_rows: inputs must share tape and width");
    rows += p.rows();
    track = track || t.needs_grad(p);
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> spans;
  Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    spans.emplace_back(p.id(), r);
    r += p.rows();
  }
  return t.record(std::move(out), track, [spans](Tape& tp, const Matrix& g) {
    for (const auto& [id, start] : spans) {
      if (tp.needs_grad(id)) tp.grad_buffer(id) += g.middleRows(start, tp.value(id).rows());
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Tape& t = tape_of(parts.front());
  Index cols = 0;
  const Index rows = parts.front().rows();
  bool track = false;
  for (const auto& p : parts) {
    require(p.tape() == &t && p.rows() == rows, "concat_cols: inputs must share tape and height");
    cols += p.cols();
    track = track || t.needs_grad(p);
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> spans;
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    spans.emplace_back(p.id(), c);
    c += p.cols();
  }
  return t.record(std::move(out), track, [spans](Tape& tp, const Matrix& g) {
    for (const auto& [id, start] : spans) {
      if (tp.needs_grad(id)) tp.grad_buffer(id) += g.middleCols(start, tp.value(id).cols());
    }
  });
}

Var gather_rows(const Var& x, const std::vector<int>& index) {
  Tape& t = tape_of(x);
  Matrix out(static_cast<Index>(index.size()), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] >= 0 && index[i] < x.rows(), "gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = x.value().row(index[i]);
  }
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix, index](Tape& tp, const Matrix& g) {
    if (!tp.needs_grad(ix)) return;
    Matrix& gx = tp.grad_buffer(ix);
    for (std::size_t i = 0; i < index.size(); ++i) gx.row(index[i]) += g.row(static_cast<Index>(i));
  });
}

std::vector<Matrix> attention_logits(const Matrix& q, const Matrix& k, int heads, double scale) {
  require(heads >= 1 && q.cols() % heads == 0, "attention: width must be divisible by the head count");
  require(q.cols() == k.cols(), "attention: query and key widths differ");
  const Index dh = q.cols() / heads;
  std::vector<Matrix> out;
  for (int h = 0; h < heads; ++h) {
    Matrix s(q.rows(), k.rows());
    s.noalias() = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose();
    out.push_back(s * scale);
  }
  return out;
}

std::vector<Matrix> attention_probabilities(const Matrix& q, const Matrix& k, int heads, double scale) {
  auto p = attention_logits(q, k, heads, scale);
  for (auto& m : p) softmax_inplace(m);
  return p;
}

Var attention(const Var& q, const Var& k, const Var& v, int heads, double scale) {
  Tape& t = tape_of(q, k);
  require(k.tape() == v.tape(), "attention: operands belong to different tapes");
  require(k.rows() == v.rows(), "attention: keys and values differ in length");
  require(q.cols() == v.cols(), "attention: value width must match query width");
  const Index dh = q.cols() / heads;
  std::vector<Matrix> probs = attention_probabilities(q.value(), k.value(), heads, scale);
  Matrix out(q.rows(), v.cols());
  for (int h = 0; h < heads; ++h) out.middleCols(h * dh, dh).noalias() = probs[static_cast<std::size_t>(h)] * v.value().middleCols(h * dh, dh);

  const int iq = q.id(), ik = k.id(), iv = v.id();
  const bool track = t.needs_grad(q) || t.needs_grad(k) || t.needs_grad(v);
  return t.record(std::move(out), track, [iq, ik, iv, heads, dh, scale, probs = std::move(probs)](Tape& tp, const Matrix& g) {
    const Matrix& qv = tp.value(iq);
    const Matrix& kv = tp.value(ik);
    const Matrix& vv = tp.value(iv);
    for (int h = 0; h < heads; ++h) {
      const Matrix& p = probs[static_cast<std::size_t>(h)];
      const auto gh = g.middleCols(h * dh, dh);
      if (tp.needs_grad(iv)) tp.grad_buffer(iv).middleCols(h * dh, dh).noalias() += p.transpose() * gh;
      if (!tp.needs_grad(iq) && !tp.needs_grad(ik)) continue;
      Matrix gp(p.rows(), p.cols());
      gp.noalias() = gh * vv.middleCols(h * dh, dh).transpose();
      const Eigen::VectorXd dot = gp.cwiseProduct(p).rowwise().sum();
      Matrix gs = (gp.colwise() - dot).cwiseProduct(p) * scale;
      if (tp.needs_grad(iq)) tp.grad_buffer(iq).middleCols(h * dh, dh).noalias() += gs * kv.middleCols(h * dh, dh);
      if (tp.needs_grad(ik)) tp.grad_buffer(ik).middleCols(h * dh, dh).noalias() += gs.transpose() * qv.middleCols(h * dh, dh);
    }
  });
}

Var sum(const Var& x) {
  Tape& t = tape_of(x);
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) tp.grad_buffer(ix).array() += g(0, 0);
  });
}

Var mean_squares(const Var& x) {
  Tape& t = tape_of(x);
  Matrix out(1, 1);
  const double n = static_cast<double>(x.value().size());
  out(0, 0) = x.value().squaredNorm() / n;
  const int ix = x.id();
  return t.record(std::move(out), t.needs_grad(x), [ix, n](Tape& tp, const Matrix& g) {
    if (tp.needs_grad(ix)) tp.grad_buffer(ix) += tp.value(ix) * (2.0 * g(0, 0) / n);
  });
}

}  // namespace farm::nn
