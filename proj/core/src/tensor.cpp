#include "aurk/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "aurk/error.hpp"

namespace aurk {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
         std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw ShapeError("negative tensor dimension " + shape.str());
  values_.assign(shape.size(), fill);
}

std::span<double> Tensor4::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor4::zero_grad() {
  if (grad_.size() != values_.size())
    grad_.assign(values_.size(), 0.0);
  else
    std::fill(grad_.begin(), grad_.end(), 0.0);
}

Tensor4 Tensor4::reshaped(Shape4 shape) const {
  if (shape.size() != shape_.size())
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  Tensor4 out;
  out.shape_ = shape;
  out.values_ = values_;
  return out;
}

void Tensor4::check_finite(const char* what) const {
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " contains a non-finite value");
}

}  // namespace aurk
