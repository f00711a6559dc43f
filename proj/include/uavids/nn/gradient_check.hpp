#pragma once

#include <functional>
#include <span>
#include <string>

#include "uavids/nn/model.hpp"

namespace uavids::nn {

struct GradientCheckReport {
    double max_relative_error = 0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0;
    double worst_numeric = 0;
    std::size_t checked = 0;

    bool passed(double tolerance = 1e-4) const { return max_relative_error < tolerance; }
};

// Analytic gradient of the batch loss at the given parameters.
using GradientFn = std::function<NetworkParams(const NetworkParams&)>;

// relative error |a - n| / max(|a|, |n|, floor); the floor keeps vanishing gradients from
// turning rounding noise into large ratios.
inline constexpr double kRelativeErrorFloor = 1e-6;

// Compares every parameter's analytic gradient with central differences of
// batch_loss. With `masks` the training path is checked under those fixed dropout
// masks; otherwise inference mode. `analytic` defaults to batch_gradient.
GradientCheckReport gradient_check(const NetworkParams& params, const ModelConfig& cfg,
                                   std::span<const MatrixXd> grids, const MatrixXd& targets,
                                   std::span<const VectorXd> masks = {}, const GradientFn& analytic = {},
                                   double step = 1e-5);

}  // namespace uavids::nn
