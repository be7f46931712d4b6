#include "farm/train/loss.hpp"

#include <string>

#include "farm/core/error.hpp"

namespace farm::train {

using nn::Matrix;

namespace {

void check_time(double t, double delta) {
  if (!(t >= 0.0 && t <= 1.0 - delta)) {
    throw InvalidArgument("velocity loss: t=" + std::to_string(t) + " outside [0, 1 - delta]");
  }
}

}  // namespace

double velocity_loss(const Matrix& pred, const Matrix& r, const Matrix& z, const Matrix& eps, double t,
                     double delta) {
  check_time(t, delta);
  require(pred.rows() == r.rows() && pred.cols() == r.cols() && z.rows() == r.rows() && z.cols() == r.cols() &&
              eps.rows() == r.rows() && eps.cols() == r.cols(),
          "velocity loss: shape mismatch");
  if (r.rows() == 0) return 0.0;
  const Matrix residual = (pred - z) / (1.0 - t) - (r - eps);
  return residual.squaredNorm() / static_cast<double>(r.rows());
}

nn::Var velocity_loss(const nn::Var& pred, const Matrix& r, const Matrix& z, const Matrix& eps, double t,
                      const std::vector<int>& masked_ids, double delta) {
  check_time(t, delta);
  const Matrix& p = pred.value();
  require(p.rows() == r.rows() && p.cols() == r.cols() && z.rows() == r.rows() && z.cols() == r.cols() &&
              eps.rows() == r.rows() && eps.cols() == r.cols(),
          "velocity loss: shape mismatch");
  nn::Tape& tape = *pred.tape();
  const double inv = 1.0 / (1.0 - t);
  const double n = static_cast<double>(masked_ids.size());

  Matrix residual = Matrix::Zero(p.rows(), p.cols());
  for (int id : masked_ids) {
    require(id >= 0 && id < p.rows(), "velocity loss: masked id out of range");
    residual.row(id) = (p.row(id) - z.row(id)) * inv - (r.row(id) - eps.row(id));
  }
  Matrix loss(1, 1);
  loss(0, 0) = masked_ids.empty() ? 0.0 : residual.squaredNorm() / n;
  const int ip = pred.id();
  return tape.record(std::move(loss), tape.needs_grad(pred),
                     [ip, inv, n, residual = std::move(residual)](nn::Tape& tp, const Matrix& g) {
                       if (!tp.needs_grad(ip) || n == 0.0) return;
                       tp.grad_buffer(ip) += residual * (2.0 * inv * g(0, 0) / n);
                     });
}

}  // namespace farm::train
