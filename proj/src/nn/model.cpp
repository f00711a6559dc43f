#include "uavids/nn/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "uavids/error.hpp"

namespace uavids::nn {

std::string_view to_string(ConvLayout l) { return l == ConvLayout::grid2d ? "grid2d" : "flat1d"; }

ConvLayout parse_conv_layout(std::string_view s) {
    if (s == "grid2d") return ConvLayout::grid2d;
    if (s == "flat1d") return ConvLayout::flat1d;
    throw ConfigError("unknown conv layout '" + std::string(s) + "' (expected grid2d or flat1d)");
}

void ModelConfig::validate() const {
    auto dims = [](Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); };
    if (input_h <= 0 || input_w <= 0) throw ShapeError("input: grid dimensions must be positive");
    if (filters <= 0 || kernel_h <= 0 || kernel_w <= 0 || pool_h <= 0 || pool_w <= 0 || lstm_units <= 0 ||
        fc_units <= 0 || output_width <= 0)
        throw ShapeError("model: layer sizes must be positive");
    if (conv_in_rows() < kernel_rows() || conv_in_cols() < kernel_cols())
        throw ShapeError("conv: input " + dims(conv_in_rows(), conv_in_cols()) + " is smaller than the " +
                         dims(kernel_rows(), kernel_cols()) + " kernel");
    if (pooled_rows() < 1 || pooled_cols() < 1)
        throw ShapeError("avgpool: conv output " + dims(conv_out_rows(), conv_out_cols()) +
                         " is smaller than the " + dims(pool_rows(), pool_cols()) + " pool window");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

NetworkParams NetworkParams::zeros(const ModelConfig& cfg) {
    cfg.validate();
    const Index h4 = 4 * cfg.lstm_units;
    NetworkParams p;
    p.conv_kernels.assign(static_cast<std::size_t>(cfg.filters), MatrixXd::Zero(cfg.kernel_rows(), cfg.kernel_cols()));
    p.conv_bias = VectorXd::Zero(cfg.filters);
    p.lstm_wx = MatrixXd::Zero(h4, cfg.step_features());
    p.lstm_wh = MatrixXd::Zero(h4, cfg.lstm_units);
    p.lstm_b = VectorXd::Zero(h4);
    p.fc1_w = MatrixXd::Zero(cfg.fc_units, cfg.lstm_units);
    p.fc1_b = VectorXd::Zero(cfg.fc_units);
    p.out_w = MatrixXd::Zero(cfg.output_width, cfg.fc_units);
    p.out_b = VectorXd::Zero(cfg.output_width);
    return p;
}

namespace {

template <typename View, typename Self>
std::vector<View> collect_views(Self& self) {
    std::vector<View> v;
    auto add = [&v](std::string name, auto& m) {
        v.push_back(View{std::move(name), m.rows(), m.cols(), {m.data(), static_cast<std::size_t>(m.size())}});
    };
    for (std::size_t c = 0; c < self.conv_kernels.size(); ++c)
        add("conv.kernel." + std::to_string(c), self.conv_kernels[c]);
    add("conv.bias", self.conv_bias);
    add("lstm.wx", self.lstm_wx);
    add("lstm.wh", self.lstm_wh);
    add("lstm.bias", self.lstm_b);
    add("fc1.weight", self.fc1_w);
    add("fc1.bias", self.fc1_b);
    add("out.weight", self.out_w);
    add("out.bias", self.out_b);
    return v;
}

}  // namespace

std::vector<ParamView> NetworkParams::views() { return collect_views<ParamView>(*this); }
std::vector<ConstParamView> NetworkParams::views() const { return collect_views<ConstParamView>(*this); }

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& v : views()) n += v.data.size();
    return n;
}

void NetworkParams::set_zero() {
    for (auto& v : views()) std::fill(v.data.begin(), v.data.end(), 0.0);
}

NetworkParams& NetworkParams::operator+=(const NetworkParams& other) {
    auto dst = views();
    auto src = other.views();
    if (!same_shape(other)) throw ShapeError("parameter sets differ in shape");
    for (std::size_t t = 0; t < dst.size(); ++t)
        for (std::size_t k = 0; k < dst[t].data.size(); ++k) dst[t].data[k] += src[t].data[k];
    return *this;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
    auto a = views();
    auto b = other.views();
    if (a.size() != b.size()) return false;
    for (std::size_t t = 0; t < a.size(); ++t)
        if (a[t].rows != b[t].rows || a[t].cols != b[t].cols) return false;
    return true;
}

bool NetworkParams::all_finite() const {
    for (const auto& v : views())
        for (double x : v.data)
            if (!std::isfinite(x)) return false;
    return true;
}

NetworkParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    NetworkParams p = NetworkParams::zeros(cfg);
    Rng rng(derive_seed({seed, 0x1417}));
    auto fill = [&rng](MatrixXd& m, Index fan_in, Index fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
    };
    const Index window = cfg.kernel_rows() * cfg.kernel_cols();
    for (auto& k : p.conv_kernels) fill(k, window, window * cfg.filters);
    fill(p.lstm_wx, cfg.step_features(), 4 * cfg.lstm_units);
    fill(p.lstm_wh, cfg.lstm_units, 4 * cfg.lstm_units);
    fill(p.fc1_w, cfg.lstm_units, cfg.fc_units);
    fill(p.out_w, cfg.fc_units, cfg.output_width);
    return p;
}

namespace {

MatrixXd conv_input_for(const MatrixXd& grid, const ModelConfig& cfg) {
    if (grid.rows() != cfg.input_h || grid.cols() != cfg.input_w)
        throw ShapeError("input: expected a " + std::to_string(cfg.input_h) + "x" + std::to_string(cfg.input_w) +
                         " grid, got " + std::to_string(grid.rows()) + "x" + std::to_string(grid.cols()));
    if (cfg.layout == ConvLayout::grid2d) return grid;
    MatrixXd col(grid.size(), 1);
    for (Index i = 0; i < grid.rows(); ++i)
        for (Index j = 0; j < grid.cols(); ++j) col(i * grid.cols() + j, 0) = grid(i, j);
    return col;
}

}  // namespace

VectorXd model_forward(const MatrixXd& grid, const NetworkParams& params, const ModelConfig& cfg, Mode mode,
                       Rng* rng, ForwardCache* cache, const VectorXd* fixed_mask) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;

    c.conv_input = conv_input_for(grid, cfg);
    c.conv_out = conv_forward(c.conv_input, params.conv_kernels, params.conv_bias);
    c.pooled = avgpool_forward(c.conv_out, cfg.pool_rows(), cfg.pool_cols());
    const MatrixXd seq = maps_to_sequence(c.pooled);
    c.lstm_h = lstm_forward(seq, params.lstm_wx, params.lstm_wh, params.lstm_b, &c.lstm);
    if (params.fc1_w.cols() != c.lstm_h.size()) throw ShapeError("fc1: weight width does not match lstm units");
    c.fc1 = dense_forward(params.fc1_w, params.fc1_b, c.lstm_h);

    if (mode == Mode::training && fixed_mask) {
        if (fixed_mask->size() != c.fc1.size()) throw ShapeError("dropout: fixed mask has the wrong length");
        c.dropout_mask = *fixed_mask;
        c.dropped = c.fc1.cwiseProduct(c.dropout_mask);
    } else {
        auto d = dropout_forward(c.fc1, cfg.dropout_rate, mode, rng);
        c.dropped = std::move(d.output);
        c.dropout_mask = std::move(d.mask);
    }
    if (params.out_w.cols() != c.dropped.size()) throw ShapeError("out: weight width does not match fc1 units");
    c.probs = sigmoid(dense_forward(params.out_w, params.out_b, c.dropped));
    return c.probs;
}

void model_backward(const ForwardCache& c, const NetworkParams& params, const ModelConfig& cfg,
                    const VectorXd& grad_logits, NetworkParams& grads) {
    const auto out = dense_backward(params.out_w, c.dropped, grad_logits);
    grads.out_w += out.w;
    grads.out_b += out.b;

    const VectorXd g_fc1 = dropout_backward(out.input, c.dropout_mask);
    const auto fc1 = dense_backward(params.fc1_w, c.lstm_h, g_fc1);
    grads.fc1_w += fc1.w;
    grads.fc1_b += fc1.b;

    const auto lstm = lstm_backward(c.lstm, params.lstm_wx, params.lstm_wh, fc1.input);
    grads.lstm_wx += lstm.wx;
    grads.lstm_wh += lstm.wh;
    grads.lstm_b += lstm.b;

    const auto g_pooled = sequence_to_maps(lstm.input, cfg.filters, cfg.pooled_rows(), cfg.pooled_cols());
    const auto g_conv = avgpool_backward(g_pooled, c.conv_out.front().rows(), c.conv_out.front().cols(),
                                         cfg.pool_rows(), cfg.pool_cols());
    const auto conv = conv_backward(c.conv_input, params.conv_kernels, g_conv);
    for (std::size_t k = 0; k < conv.kernels.size(); ++k) grads.conv_kernels[k] += conv.kernels[k];
    grads.conv_bias += conv.bias;
}

namespace {

void check_batch(const ModelConfig& cfg, std::span<const MatrixXd> grids, const MatrixXd& targets,
                 std::span<const VectorXd> masks) {
    if (grids.empty()) throw ShapeError("batch: no samples");
    if (targets.rows() != static_cast<Index>(grids.size()) || targets.cols() != cfg.output_width)
        throw ShapeError("batch: targets must be " + std::to_string(grids.size()) + "x" +
                         std::to_string(cfg.output_width));
    if (!masks.empty() && masks.size() != grids.size()) throw ShapeError("batch: one dropout mask per sample");
}

}  // namespace

BatchGradient batch_gradient(const NetworkParams& params, const ModelConfig& cfg, std::span<const MatrixXd> grids,
                             const MatrixXd& targets, Mode mode, Rng* rng, std::span<const VectorXd> masks) {
    check_batch(cfg, grids, targets, masks);
    const auto n = static_cast<Index>(grids.size());
    BatchGradient out;
    out.probs.resize(n, cfg.output_width);
    out.grads = NetworkParams::zeros(cfg);

    ForwardCache cache;
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (Index s = 0; s < n; ++s) {
        const auto idx = static_cast<std::size_t>(s);
        const VectorXd* mask = masks.empty() ? nullptr : &masks[idx];
        const VectorXd p = model_forward(grids[idx], params, cfg, mode, rng, &cache, mask);
        out.probs.row(s) = p.transpose();
        // sigmoid and cross-entropy fused: dL/dlogit = (p - y) / 2N
        const VectorXd grad_logits = (p - targets.row(s).transpose()) * scale;
        model_backward(cache, params, cfg, grad_logits, out.grads);
    }
    out.loss = bce_loss(out.probs, targets);
    return out;
}

double batch_loss(const NetworkParams& params, const ModelConfig& cfg, std::span<const MatrixXd> grids,
                  const MatrixXd& targets, Mode mode, std::span<const VectorXd> masks) {
    check_batch(cfg, grids, targets, masks);
    MatrixXd probs(static_cast<Index>(grids.size()), cfg.output_width);
    for (std::size_t s = 0; s < grids.size(); ++s) {
        const VectorXd* mask = masks.empty() ? nullptr : &masks[s];
        if (mode == Mode::training && !mask) throw ConfigError("batch_loss: training mode needs fixed masks");
        probs.row(static_cast<Index>(s)) = model_forward(grids[s], params, cfg, mode, nullptr, nullptr, mask).transpose();
    }
    return bce_loss(probs, targets);
}

}  // namespace uavids::nn
