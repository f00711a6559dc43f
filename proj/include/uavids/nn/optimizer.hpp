#pragma once

#include <span>
#include <string_view>

#include "uavids/nn/model.hpp"

namespace uavids::nn {

// damped:    v <- beta * v + (1 - beta) * grad,  w <- w - lr * v
// classical: v <- beta * v + grad,               w <- w - lr * v
enum class MomentumForm { damped, classical };

std::string_view to_string(MomentumForm f);
MomentumForm parse_momentum_form(std::string_view s);

struct OptimizerState {
    NetworkParams velocity;
    double learning_rate = 0.01;
    double momentum = 0.9;
    MomentumForm form = MomentumForm::damped;
};

// Zero velocity shaped like `params`. ConfigError on lr <= 0 or momentum outside [0, 1).
OptimizerState make_optimizer(const NetworkParams& params, double learning_rate, double momentum,
                              MomentumForm form = MomentumForm::damped);

// One update on flat buffers. DivergenceError("divergence detected") on a non-finite gradient.
void sgd_momentum_update(std::span<double> weights, std::span<const double> grads, std::span<double> velocity,
                         double learning_rate, double momentum, MomentumForm form);

// Updates every tensor of `params` in place; nothing is modified when any gradient is non-finite.
void sgd_momentum_step(NetworkParams& params, const NetworkParams& grads, OptimizerState& state);

}  // namespace uavids::nn
