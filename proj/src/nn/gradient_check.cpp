#include "uavids/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace uavids::nn {

GradientCheckReport gradient_check(const NetworkParams& params, const ModelConfig& cfg,
                                   std::span<const MatrixXd> grids, const MatrixXd& targets,
                                   std::span<const VectorXd> masks, const GradientFn& analytic, double step) {
    const Mode mode = masks.empty() ? Mode::inference : Mode::training;
    const NetworkParams grads = analytic ? analytic(params)
                                         : batch_gradient(params, cfg, grids, targets, mode, nullptr, masks).grads;

    GradientCheckReport report;
    NetworkParams probe = params;
    auto probe_views = probe.views();
    const auto grad_views = grads.views();
    for (std::size_t t = 0; t < probe_views.size(); ++t) {
        auto& view = probe_views[t];
        for (std::size_t k = 0; k < view.data.size(); ++k) {
            const double saved = view.data[k];
            view.data[k] = saved + step;
            const double up = batch_loss(probe, cfg, grids, targets, mode, masks);
            view.data[k] = saved - step;
            const double down = batch_loss(probe, cfg, grids, targets, mode, masks);
            view.data[k] = saved;

            const double numeric = (up - down) / (2.0 * step);
            const double a = grad_views[t].data[k];
            const double denom = std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
            const double rel = std::abs(a - numeric) / denom;
            ++report.checked;
            if (rel > report.max_relative_error || std::isnan(rel)) {
                report.max_relative_error = std::isnan(rel) ? INFINITY : rel;
                report.worst_parameter = view.name;
                report.worst_index = k;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace uavids::nn
