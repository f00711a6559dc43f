#pragma once

#include <vector>

#include <Eigen/Core>

#include "uavids/rng.hpp"

namespace uavids::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// One matrix per channel.
using FeatureMaps = std::vector<MatrixXd>;

enum class Mode { inference, training };

// --- convolution: single input channel, valid padding, stride 1 ---------------

// out[c](i, j) = bias(c) + sum_{u,v} kernels[c](u, v) * input(i + u, j + v)
FeatureMaps conv_forward(const MatrixXd& input, const std::vector<MatrixXd>& kernels, const VectorXd& bias);

struct ConvGrads {
    MatrixXd input;
    std::vector<MatrixXd> kernels;
    VectorXd bias;
};

ConvGrads conv_backward(const MatrixXd& input, const std::vector<MatrixXd>& kernels,
                        const FeatureMaps& grad_out);

// --- average pooling, non-overlapping; trailing rows/cols that do not fill a window are dropped

FeatureMaps avgpool_forward(const FeatureMaps& maps, Index pool_h, Index pool_w);
FeatureMaps avgpool_backward(const FeatureMaps& grad_out, Index in_rows, Index in_cols, Index pool_h,
                             Index pool_w);

// Rows become timesteps: step t is [map_0.row(t), map_1.row(t), ...].
MatrixXd maps_to_sequence(const FeatureMaps& maps);
FeatureMaps sequence_to_maps(const MatrixXd& seq, Index channels, Index rows, Index cols);

// --- LSTM ------------------------------------------------------------------------
// Gate blocks in the stacked weights are ordered input, forget, candidate, output.
// wx: 4H x D, wh: 4H x H, b: 4H. Zero initial hidden and cell state.

struct LstmCache {
    MatrixXd input;  // T x D
    std::vector<VectorXd> i, f, g, o;
    std::vector<VectorXd> c, h;  // c[t], h[t] after step t; index 0 is the zero state
};

// Returns the hidden state after the last step. ShapeError on an empty sequence.
VectorXd lstm_forward(const MatrixXd& seq, const MatrixXd& wx, const MatrixXd& wh, const VectorXd& b,
                      LstmCache* cache = nullptr);

struct LstmGrads {
    MatrixXd wx;
    MatrixXd wh;
    VectorXd b;
    MatrixXd input;  // T x D
};

// Full backpropagation through time from a gradient on the final hidden state.
LstmGrads lstm_backward(const LstmCache& cache, const MatrixXd& wx, const MatrixXd& wh,
                        const VectorXd& grad_h);

// --- dense / activations / dropout ----------------------------------------------

inline VectorXd dense_forward(const MatrixXd& w, const VectorXd& b, const VectorXd& x) { return w * x + b; }

struct DenseGrads {
    MatrixXd w;
    VectorXd b;
    VectorXd input;
};

DenseGrads dense_backward(const MatrixXd& w, const VectorXd& x, const VectorXd& grad_out);

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

// grad wrt the sigmoid input, given its output y
inline VectorXd sigmoid_backward(const VectorXd& y, const VectorXd& grad_out) {
    return grad_out.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
}

struct DropoutResult {
    VectorXd output;
    VectorXd mask;  // 0 or 1/(1-rate) per unit; all ones in inference mode
};

// Inverted dropout. ConfigError when rate is outside [0, 1).
DropoutResult dropout_forward(const VectorXd& x, double rate, Mode mode, Rng* rng);
VectorXd draw_dropout_mask(Index n, double rate, Rng& rng);

inline VectorXd dropout_backward(const VectorXd& grad_out, const VectorXd& mask) {
    return grad_out.cwiseProduct(mask);
}

// --- loss ----------------------------------------------------------------------

inline constexpr double kProbabilityEpsilon = 1e-7;

// L = -1/(2N) sum_ij [y log p + (1-y) log(1-p)], p clamped to [eps, 1-eps].
// probs and targets are N x width.
double bce_loss(const MatrixXd& probs, const MatrixXd& targets);

// dL/dp of bce_loss (zero where the clamp is active).
MatrixXd bce_grad(const MatrixXd& probs, const MatrixXd& targets);

}  // namespace uavids::nn
