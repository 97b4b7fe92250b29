#pragma once

#include <cstdint>
#include <span>

#include "aurk/labels.hpp"
#include "aurk/tensor.hpp"

namespace aurk {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

/// Multi-label sigmoid cross-entropy over R rows and L columns:
///   loss = (1/R) * sum_r sum_l [ softplus(x) - y*x ]
/// which is -(1/R) * sum [ y log s(x) + (1-y) log(1-s(x)) ] computed without
/// overflow. grad = (s(x) - y) / R. `targets` holds R*L bits, row-major.
LossResult sigmoid_ce_loss(const Matrix& logits, std::span<const std::uint8_t> targets);
LossResult sigmoid_ce_loss(const Matrix& logits, const LabelMatrix& targets);

double sigmoid(double x) noexcept;
/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

}  // namespace aurk
