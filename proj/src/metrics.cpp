#include "d3fl/metrics.hpp"

#include "d3fl/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace d3fl::eval {

void MetricsAccumulator::add(const double* pred, const double* target, std::size_t len) {
    sq_ += kernels::sum_sq_diff(pred, target, len);
    abs_ += kernels::sum_abs_diff(pred, target, len);
    n_ += len;
}

Metrics MetricsAccumulator::finalize() const {
    if (n_ == 0) throw std::domain_error("metrics over an empty sample set");
    Metrics m;
    m.mse = sq_ / static_cast<double>(n_);
    m.mae = abs_ / static_cast<double>(n_);
    m.rmse = std::sqrt(m.mse);
    return m;
}

Metrics compute_metrics(const std::vector<std::vector<double>>& preds,
                        const std::vector<std::vector<double>>& targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("compute_metrics: pred/target count mismatch");
    MetricsAccumulator acc;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != targets[i].size())
            throw std::invalid_argument("compute_metrics: sample " + std::to_string(i) +
                                        " length mismatch");
        acc.add(preds[i].data(), targets[i].data(), preds[i].size());
    }
    return acc.finalize();
}

}  // namespace d3fl::eval
