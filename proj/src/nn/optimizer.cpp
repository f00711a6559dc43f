#include "uavids/nn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uavids/error.hpp"

namespace uavids::nn {

std::string_view to_string(MomentumForm f) { return f == MomentumForm::damped ? "damped" : "classical"; }

MomentumForm parse_momentum_form(std::string_view s) {
    if (s == "damped") return MomentumForm::damped;
    if (s == "classical") return MomentumForm::classical;
    throw ConfigError("unknown momentum form '" + std::string(s) + "' (expected damped or classical)");
}

OptimizerState make_optimizer(const NetworkParams& params, double learning_rate, double momentum,
                              MomentumForm form) {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    OptimizerState s{params, learning_rate, momentum, form};
    s.velocity.set_zero();
    return s;
}

void sgd_momentum_update(std::span<double> weights, std::span<const double> grads, std::span<double> velocity,
                         double learning_rate, double momentum, MomentumForm form) {
    if (weights.size() != grads.size() || weights.size() != velocity.size())
        throw ShapeError("sgd: weight, gradient and velocity sizes differ");
    if (!std::all_of(grads.begin(), grads.end(), [](double g) { return std::isfinite(g); }))
        throw DivergenceError("divergence detected");
    const double grad_scale = form == MomentumForm::damped ? 1.0 - momentum : 1.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        velocity[k] = momentum * velocity[k] + grad_scale * grads[k];
        weights[k] -= learning_rate * velocity[k];
    }
}

void sgd_momentum_step(NetworkParams& params, const NetworkParams& grads, OptimizerState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.velocity))
        throw ShapeError("sgd: parameter, gradient and velocity shapes differ");
    if (!grads.all_finite()) throw DivergenceError("divergence detected");
    auto w = params.views();
    auto g = grads.views();
    auto v = state.velocity.views();
    for (std::size_t t = 0; t < w.size(); ++t)
        sgd_momentum_update(w[t].data, g[t].data, v[t].data, state.learning_rate, state.momentum, state.form);
}

}  // namespace uavids::nn
