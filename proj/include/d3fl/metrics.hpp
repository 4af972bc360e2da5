#pragma once

#include <cstddef>
#include <vector>

namespace d3fl::eval {

struct Metrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

// Streams (prediction, target) pairs and folds them into error sums, so
// callers evaluating window-by-window never materialize the full lists.
class MetricsAccumulator {
public:
    void add(const double* pred, const double* target, std::size_t len);
    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    // Throws std::domain_error when nothing was accumulated.
    [[nodiscard]] Metrics finalize() const;

private:
    double sq_ = 0.0;
    double abs_ = 0.0;
    std::size_t n_ = 0;
};

// MSE/MAE are means over all elements of all samples; RMSE = sqrt(MSE).
Metrics compute_metrics(const std::vector<std::vector<double>>& preds,
                        const std::vector<std::vector<double>>& targets);

}  // namespace d3fl::eval
