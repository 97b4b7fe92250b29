#include "aurk/optim.hpp"

#include <cmath>
#include <utility>

#include "aurk/error.hpp"

namespace aurk {

OptimState make_optim_state(std::span<const Param* const> params, const SgdConfig& config) {
  OptimState s;
  s.config = config;
  s.lr = lr_schedule(0, config);
  for (const Param* p : params) s.velocity.emplace_back(p->value.size(), 0.0);
  return s;
}

double lr_schedule(int epoch, const SgdConfig& config) {
  if (epoch < 0) throw Error("epoch must be >= 0");
  if (config.decay_every < 1) throw Error("decay_every must be >= 1");
  return config.base_lr * std::pow(config.decay_factor, epoch / config.decay_every);
}

void begin_epoch(OptimState& state, int epoch) {
  state.epoch = epoch;
  state.lr = lr_schedule(epoch, state.config);
}

void sgd_momentum_step(std::span<Param* const> params, OptimState& state) {
  if (params.size() != state.velocity.size())
    throw ShapeError("optimizer state tracks " + std::to_string(state.velocity.size()) +
                     " parameters, got " + std::to_string(params.size()));
  const double mu = state.config.momentum;
  const double wd = state.config.weight_decay;
  const double lr = state.lr;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->value.values();
    const auto g = std::as_const(params[k]->value).grad();
    auto& v = state.velocity[k];
    if (v.size() != p.size()) throw ShapeError("velocity shape differs for '" + params[k]->name + "'");
    const bool has_grad = g.size() == p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = (has_grad ? g[i] : 0.0) + wd * p[i];
      v[i] = mu * v[i] - lr * gi;
      p[i] += v[i];
    }
  }
}

}  // namespace aurk
