#pragma once

#include <span>
#include <string>
#include <vector>

#include "aurk/tensor.hpp"

namespace aurk {

struct SgdConfig {
  double base_lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double decay_factor = 0.1;
  int decay_every = 10;  // epochs
};

/// Velocity buffers (one per parameter, same order) plus the epoch counter.
struct OptimState {
  SgdConfig config;
  std::vector<std::vector<double>> velocity;
  int epoch = 0;
  double lr = 0.001;
};

OptimState make_optim_state(std::span<const Param* const> params, const SgdConfig& config);

/// Step learning rate: base_lr * decay_factor ^ floor(epoch / decay_every).
double lr_schedule(int epoch, const SgdConfig& config = SgdConfig{});

/// Classical momentum with L2 weight decay folded into the gradient:
///   v <- momentum * v - lr * (g + weight_decay * p);  p <- p + v
/// Uses `state.lr`. Parameters without a gradient buffer count as g = 0.
void sgd_momentum_step(std::span<Param* const> params, OptimState& state);

/// Sets `state.epoch` and `state.lr` from the schedule.
void begin_epoch(OptimState& state, int epoch);

}  // namespace aurk
