#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavids/nn/layers.hpp"
#include "uavids/rng.hpp"

namespace uavids::nn {

// grid2d: 2-D kernel over the h x w grid, pooled rows become LSTM steps.
// flat1d: the grid is flattened row-major into a column and convolved with a
// (kernel_h * kernel_w) x 1 kernel, pooled by pool_h x 1; positions become steps.
enum class ConvLayout { grid2d, flat1d };

std::string_view to_string(ConvLayout l);
ConvLayout parse_conv_layout(std::string_view s);

// conv -> avgpool -> rows-as-steps -> LSTM -> dense -> dropout -> dense -> sigmoid
struct ModelConfig {
    Index input_h = 6;
    Index input_w = 6;
    Index filters = 5;
    Index kernel_h = 4;
    Index kernel_w = 4;
    Index pool_h = 2;
    Index pool_w = 2;
    Index lstm_units = 32;
    Index fc_units = 100;
    Index output_width = 2;
    double dropout_rate = 0.4;
    ConvLayout layout = ConvLayout::grid2d;

    // Shape of the tensor the convolution sees and of its kernel/pool windows.
    Index conv_in_rows() const { return layout == ConvLayout::grid2d ? input_h : input_h * input_w; }
    Index conv_in_cols() const { return layout == ConvLayout::grid2d ? input_w : 1; }
    Index kernel_rows() const { return layout == ConvLayout::grid2d ? kernel_h : kernel_h * kernel_w; }
    Index kernel_cols() const { return layout == ConvLayout::grid2d ? kernel_w : 1; }
    Index pool_rows() const { return pool_h; }
    Index pool_cols() const { return layout == ConvLayout::grid2d ? pool_w : 1; }

    Index conv_out_rows() const { return conv_in_rows() - kernel_rows() + 1; }
    Index conv_out_cols() const { return conv_in_cols() - kernel_cols() + 1; }
    Index pooled_rows() const { return conv_out_rows() / pool_rows(); }
    Index pooled_cols() const { return conv_out_cols() / pool_cols(); }
    Index sequence_length() const { return pooled_rows(); }
    Index step_features() const { return filters * pooled_cols(); }

    // ShapeError naming the first stage that cannot be built.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ParamView {
    std::string name;
    Index rows;
    Index cols;
    std::span<double> data;
};

struct ConstParamView {
    std::string name;
    Index rows;
    Index cols;
    std::span<const double> data;
};

// All trainable tensors. Also used for gradients and momentum buffers.
struct NetworkParams {
    std::vector<MatrixXd> conv_kernels;  // filters x (kernel_rows x kernel_cols)
    VectorXd conv_bias;
    MatrixXd lstm_wx;  // 4H x step_features
    MatrixXd lstm_wh;  // 4H x H
    VectorXd lstm_b;   // 4H
    MatrixXd fc1_w;    // fc_units x H
    VectorXd fc1_b;
    MatrixXd out_w;  // output_width x fc_units
    VectorXd out_b;

    static NetworkParams zeros(const ModelConfig& cfg);

    // Declaration order: conv.kernel.0..F-1, conv.bias, lstm.wx, lstm.wh, lstm.bias,
    // fc1.weight, fc1.bias, out.weight, out.bias.
    std::vector<ParamView> views();
    std::vector<ConstParamView> views() const;

    std::size_t parameter_count() const;
    void set_zero();
    NetworkParams& operator+=(const NetworkParams& other);
    bool same_shape(const NetworkParams& other) const;
    bool all_finite() const;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)) per weight tensor, zero biases.
NetworkParams init_params(const ModelConfig& cfg, std::uint64_t seed);

struct ForwardCache {
    MatrixXd conv_input;
    FeatureMaps conv_out;
    FeatureMaps pooled;
    LstmCache lstm;
    VectorXd lstm_h;
    VectorXd fc1;
    VectorXd dropout_mask;
    VectorXd dropped;
    VectorXd probs;
};

// Probabilities, one per output unit. In training mode the dropout mask is drawn
// from `rng`, or taken from `fixed_mask` when given (gradient checks).
VectorXd model_forward(const MatrixXd& grid, const NetworkParams& params, const ModelConfig& cfg, Mode mode,
                       Rng* rng = nullptr, ForwardCache* cache = nullptr, const VectorXd* fixed_mask = nullptr);

// Accumulates into `grads` the parameter gradient for a gradient on the output
// pre-activations (logits).
void model_backward(const ForwardCache& cache, const NetworkParams& params, const ModelConfig& cfg,
                    const VectorXd& grad_logits, NetworkParams& grads);

struct BatchGradient {
    double loss = 0;
    MatrixXd probs;  // N x width
    NetworkParams grads;
};

// Mean-reduced BCE over a batch and its parameter gradient. `masks`, when
// non-empty, fixes one dropout mask per sample (training path); otherwise
// training mode draws masks from `rng`.
BatchGradient batch_gradient(const NetworkParams& params, const ModelConfig& cfg, std::span<const MatrixXd> grids,
                             const MatrixXd& targets, Mode mode, Rng* rng = nullptr,
                             std::span<const VectorXd> masks = {});

// Loss only, no backward pass.
double batch_loss(const NetworkParams& params, const ModelConfig& cfg, std::span<const MatrixXd> grids,
                  const MatrixXd& targets, Mode mode, std::span<const VectorXd> masks = {});

}  // namespace uavids::nn
