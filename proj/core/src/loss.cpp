#include "aurk/loss.hpp"

#include <algorithm>
#include <cmath>

#include "aurk/error.hpp"

namespace aurk {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

LossResult sigmoid_ce_loss(const Matrix& logits, std::span<const std::uint8_t> targets) {
  if (targets.size() != logits.data.size())
    throw ShapeError("loss targets have " + std::to_string(targets.size()) + " entries, logits " +
                     std::to_string(logits.data.size()));
  if (logits.rows < 1) throw ShapeError("loss needs at least one row");
  LossResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  const double inv_r = 1.0 / logits.rows;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.data.size(); ++i) {
    const double x = logits.data[i];
    const double y = targets[i] ? 1.0 : 0.0;
    total += softplus(x) - y * x;
    res.grad.data[i] = (sigmoid(x) - y) * inv_r;
  }
  res.loss = total * inv_r;
  return res;
}

LossResult sigmoid_ce_loss(const Matrix& logits, const LabelMatrix& targets) {
  if (targets.rows() != logits.rows || targets.cols() != logits.cols)
    throw ShapeError("logits and label matrix differ in shape");
  return sigmoid_ce_loss(logits, targets.bits());
}

}  // namespace aurk
