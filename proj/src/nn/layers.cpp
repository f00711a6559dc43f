#include "uavids/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "uavids/error.hpp"

namespace uavids::nn {

FeatureMaps conv_forward(const MatrixXd& input, const std::vector<MatrixXd>& kernels, const VectorXd& bias) {
    if (kernels.empty()) throw ShapeError("conv: no kernels");
    if (bias.size() != static_cast<Index>(kernels.size())) throw ShapeError("conv: bias/kernel count mismatch");
    const Index kh = kernels.front().rows();
    const Index kw = kernels.front().cols();
    if (input.rows() < kh || input.cols() < kw)
        throw ShapeError("conv: input " + std::to_string(input.rows()) + "x" + std::to_string(input.cols()) +
                         " is smaller than the " + std::to_string(kh) + "x" + std::to_string(kw) + " kernel");
    const Index oh = input.rows() - kh + 1;
    const Index ow = input.cols() - kw + 1;

    FeatureMaps out;
    out.reserve(kernels.size());
    for (std::size_t c = 0; c < kernels.size(); ++c) {
        const auto& k = kernels[c];
        if (k.rows() != kh || k.cols() != kw) throw ShapeError("conv: kernels differ in shape");
        MatrixXd m = MatrixXd::Constant(oh, ow, bias(static_cast<Index>(c)));
        for (Index u = 0; u < kh; ++u)
            for (Index v = 0; v < kw; ++v) m += k(u, v) * input.block(u, v, oh, ow);
        out.push_back(std::move(m));
    }
    return out;
}

ConvGrads conv_backward(const MatrixXd& input, const std::vector<MatrixXd>& kernels,
                        const FeatureMaps& grad_out) {
    if (grad_out.size() != kernels.size()) throw ShapeError("conv backward: channel mismatch");
    ConvGrads g;
    g.input = MatrixXd::Zero(input.rows(), input.cols());
    g.bias.resize(static_cast<Index>(kernels.size()));
    for (std::size_t c = 0; c < kernels.size(); ++c) {
        const auto& k = kernels[c];
        const auto& go = grad_out[c];
        MatrixXd gk(k.rows(), k.cols());
        for (Index u = 0; u < k.rows(); ++u) {
            for (Index v = 0; v < k.cols(); ++v) {
                gk(u, v) = go.cwiseProduct(input.block(u, v, go.rows(), go.cols())).sum();
                g.input.block(u, v, go.rows(), go.cols()) += k(u, v) * go;
            }
        }
        g.kernels.push_back(std::move(gk));
        g.bias(static_cast<Index>(c)) = go.sum();
    }
    return g;
}

FeatureMaps avgpool_forward(const FeatureMaps& maps, Index pool_h, Index pool_w) {
    FeatureMaps out;
    out.reserve(maps.size());
    for (const auto& m : maps) {
        const Index oh = m.rows() / pool_h;
        const Index ow = m.cols() / pool_w;
        if (oh == 0 || ow == 0)
            throw ShapeError("avgpool: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " map is smaller than the pool window");
        MatrixXd p(oh, ow);
        for (Index i = 0; i < oh; ++i)
            for (Index j = 0; j < ow; ++j) p(i, j) = m.block(i * pool_h, j * pool_w, pool_h, pool_w).mean();
        out.push_back(std::move(p));
    }
    return out;
}

FeatureMaps avgpool_backward(const FeatureMaps& grad_out, Index in_rows, Index in_cols, Index pool_h,
                             Index pool_w) {
    const double share = 1.0 / static_cast<double>(pool_h * pool_w);
    FeatureMaps out;
    out.reserve(grad_out.size());
    for (const auto& g : grad_out) {
        MatrixXd m = MatrixXd::Zero(in_rows, in_cols);
        for (Index i = 0; i < g.rows(); ++i)
            for (Index j = 0; j < g.cols(); ++j) m.block(i * pool_h, j * pool_w, pool_h, pool_w).setConstant(g(i, j) * share);
        out.push_back(std::move(m));
    }
    return out;
}

MatrixXd maps_to_sequence(const FeatureMaps& maps) {
    const Index c = static_cast<Index>(maps.size());
    const Index rows = maps.front().rows();
    const Index cols = maps.front().cols();
    MatrixXd seq(rows, c * cols);
    for (Index k = 0; k < c; ++k) seq.middleCols(k * cols, cols) = maps[static_cast<std::size_t>(k)];
    return seq;
}

FeatureMaps sequence_to_maps(const MatrixXd& seq, Index channels, Index rows, Index cols) {
    if (seq.rows() != rows || seq.cols() != channels * cols) throw ShapeError("sequence_to_maps: shape mismatch");
    FeatureMaps maps;
    for (Index k = 0; k < channels; ++k) maps.emplace_back(seq.middleCols(k * cols, cols));
    return maps;
}

VectorXd lstm_forward(const MatrixXd& seq, const MatrixXd& wx, const MatrixXd& wh, const VectorXd& b,
                      LstmCache* cache) {
    const Index steps = seq.rows();
    const Index hidden = wh.cols();
    if (steps == 0) throw ShapeError("lstm: empty sequence");
    if (wx.rows() != 4 * hidden || wh.rows() != 4 * hidden || b.size() != 4 * hidden)
        throw ShapeError("lstm: gate weights must have 4*units rows");
    if (wx.cols() != seq.cols())
        throw ShapeError("lstm: expected " + std::to_string(wx.cols()) + " features per step, got " +
                         std::to_string(seq.cols()));

    VectorXd h = VectorXd::Zero(hidden);
    VectorXd c = VectorXd::Zero(hidden);
    if (cache) {
        *cache = LstmCache{};
        cache->input = seq;
        cache->h.push_back(h);
        cache->c.push_back(c);
    }
    for (Index t = 0; t < steps; ++t) {
        const VectorXd z = wx * seq.row(t).transpose() + wh * h + b;
        const VectorXd i = sigmoid(z.segment(0, hidden));
        const VectorXd f = sigmoid(z.segment(hidden, hidden));
        const VectorXd g = z.segment(2 * hidden, hidden).array().tanh().matrix();
        const VectorXd o = sigmoid(z.segment(3 * hidden, hidden));
        c = f.cwiseProduct(c) + i.cwiseProduct(g);
        h = o.cwiseProduct(c.array().tanh().matrix());
        if (cache) {
            cache->i.push_back(i);
            cache->f.push_back(f);
            cache->g.push_back(g);
            cache->o.push_back(o);
            cache->c.push_back(c);
            cache->h.push_back(h);
        }
    }
    return h;
}

LstmGrads lstm_backward(const LstmCache& cache, const MatrixXd& wx, const MatrixXd& wh, const VectorXd& grad_h) {
    const Index steps = cache.input.rows();
    const Index hidden = wh.cols();
    LstmGrads g;
    g.wx = MatrixXd::Zero(wx.rows(), wx.cols());
    g.wh = MatrixXd::Zero(wh.rows(), wh.cols());
    g.b = VectorXd::Zero(4 * hidden);
    g.input = MatrixXd::Zero(steps, wx.cols());

    VectorXd dh = grad_h;
    VectorXd dc_next = VectorXd::Zero(hidden);
    VectorXd dz(4 * hidden);
    for (Index t = steps - 1; t >= 0; --t) {
        const auto s = static_cast<std::size_t>(t);
        const VectorXd& i = cache.i[s];
        const VectorXd& f = cache.f[s];
        const VectorXd& gg = cache.g[s];
        const VectorXd& o = cache.o[s];
        const VectorXd& c_prev = cache.c[s];
        const VectorXd& h_prev = cache.h[s];
        const Eigen::ArrayXd tc = cache.c[s + 1].array().tanh();

        const Eigen::ArrayXd dc = dc_next.array() + dh.array() * o.array() * (1.0 - tc.square());
        dz.segment(0, hidden) = (dc * gg.array() * i.array() * (1.0 - i.array())).matrix();
        dz.segment(hidden, hidden) = (dc * c_prev.array() * f.array() * (1.0 - f.array())).matrix();
        dz.segment(2 * hidden, hidden) = (dc * i.array() * (1.0 - gg.array().square())).matrix();
        dz.segment(3 * hidden, hidden) = (dh.array() * tc * o.array() * (1.0 - o.array())).matrix();
        dc_next = (dc * f.array()).matrix();

        g.wx.noalias() += dz * cache.input.row(t);
        g.wh.noalias() += dz * h_prev.transpose();
        g.b += dz;
        g.input.row(t) = (wx.transpose() * dz).transpose();
        dh = wh.transpose() * dz;
    }
    return g;
}

DenseGrads dense_backward(const MatrixXd& w, const VectorXd& x, const VectorXd& grad_out) {
    return {grad_out * x.transpose(), grad_out, w.transpose() * grad_out};
}

VectorXd draw_dropout_mask(Index n, double rate, Rng& rng) {
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    VectorXd mask(n);
    for (Index k = 0; k < n; ++k) mask(k) = keep(rng) ? scale : 0.0;
    return mask;
}

DropoutResult dropout_forward(const VectorXd& x, double rate, Mode mode, Rng* rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
    if (mode == Mode::inference || rate == 0.0) return {x, VectorXd::Ones(x.size())};
    if (!rng) throw ConfigError("training-mode dropout needs a random generator");
    VectorXd mask = draw_dropout_mask(x.size(), rate, *rng);
    return {x.cwiseProduct(mask), std::move(mask)};
}

namespace {

void check_same_shape(const MatrixXd& probs, const MatrixXd& targets) {
    if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
        throw ShapeError("bce: predictions " + std::to_string(probs.rows()) + "x" + std::to_string(probs.cols()) +
                         " vs targets " + std::to_string(targets.rows()) + "x" + std::to_string(targets.cols()));
    if (probs.rows() == 0) throw ShapeError("bce: empty batch");
}

}  // namespace

double bce_loss(const MatrixXd& probs, const MatrixXd& targets) {
    check_same_shape(probs, targets);
    const Eigen::ArrayXXd p = probs.array().max(kProbabilityEpsilon).min(1.0 - kProbabilityEpsilon);
    const Eigen::ArrayXXd y = targets.array();
    const double sum = (y * p.log() + (1.0 - y) * (1.0 - p).log()).sum();
    return -sum / (2.0 * static_cast<double>(probs.rows()));
}

MatrixXd bce_grad(const MatrixXd& probs, const MatrixXd& targets) {
    check_same_shape(probs, targets);
    const double scale = -1.0 / (2.0 * static_cast<double>(probs.rows()));
    MatrixXd g(probs.rows(), probs.cols());
    for (Index i = 0; i < probs.rows(); ++i) {
        for (Index j = 0; j < probs.cols(); ++j) {
            const double p = probs(i, j);
            const double y = targets(i, j);
            const bool clamped = p < kProbabilityEpsilon || p > 1.0 - kProbabilityEpsilon;
            g(i, j) = clamped ? 0.0 : scale * (y / p - (1.0 - y) / (1.0 - p));
        }
    }
    return g;
}

}  // namespace uavids::nn
