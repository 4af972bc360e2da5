#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "d3fl/rng.hpp"

namespace d3fl::model {

struct Scaler {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;  // max == min on the fitted region
};

// fit on the first `count` values (the training-visible prefix)
Scaler fit_scaler(const std::vector<double>& series, std::size_t count);
double scale_value(double x, const Scaler& s);
double inverse_scale(double y, const Scaler& s);
std::vector<double> apply_scaler(const std::vector<double>& series, const Scaler& s);
// fit on the whole series and transform it
std::pair<std::vector<double>, Scaler> min_max_scale(const std::vector<double>& series);

// Overlapping stride-1 windows in chronological order: window k reads
// inputs scaled[k..k+L) and targets scaled[k+L..k+L+O).
struct WindowedDataset {
    std::size_t L = 24;
    std::size_t O = 2;
    std::vector<double> inputs;   // N x L, row-major
    std::vector<double> targets;  // N x O, row-major
    Scaler scaler;

    std::size_t size() const { return L ? inputs.size() / L : 0; }
    const double* input(std::size_t k) const { return inputs.data() + k * L; }
    const double* target(std::size_t k) const { return targets.data() + k * O; }
};

WindowedDataset make_windows(const std::vector<double>& scaled, std::size_t L = 24,
                             std::size_t O = 2);
// first floor(train_frac * N) windows train, the rest validate; no shuffling
std::pair<WindowedDataset, WindowedDataset> chrono_split(const WindowedDataset& ds,
                                                         double train_frac = 0.9);

// LSTM (gate order i,f,g,o) plus a fully connected head, stored flat in the
// order W_ih | W_hh | b_ih | b_hh | W_fc | b_fc, matrices row-major.
struct ModelParams {
    std::size_t H = 128;
    std::size_t I = 1;
    std::size_t O = 2;
    std::vector<double> flat;

    static std::size_t param_count(std::size_t H, std::size_t I, std::size_t O) {
        return 4 * H * I + 4 * H * H + 4 * H + 4 * H + O * H + O;
    }
    std::size_t count() const { return param_count(H, I, O); }

    std::size_t off_w_ih() const { return 0; }
    std::size_t off_w_hh() const { return 4 * H * I; }
    std::size_t off_b_ih() const { return 4 * H * I + 4 * H * H; }
    std::size_t off_b_hh() const { return off_b_ih() + 4 * H; }
    std::size_t off_w_fc() const { return off_b_hh() + 4 * H; }
    std::size_t off_b_fc() const { return off_w_fc() + O * H; }

    const double* w_ih() const { return flat.data() + off_w_ih(); }
    const double* w_hh() const { return flat.data() + off_w_hh(); }
    const double* b_ih() const { return flat.data() + off_b_ih(); }
    const double* b_hh() const { return flat.data() + off_b_hh(); }
    const double* w_fc() const { return flat.data() + off_w_fc(); }
    const double* b_fc() const { return flat.data() + off_b_fc(); }
};

const std::vector<double>& flatten(const ModelParams& p);
ModelParams unflatten(std::vector<double> flat, std::size_t H, std::size_t I, std::size_t O);

// weights uniform in [-1/sqrt(H), 1/sqrt(H)] drawn in flat order; biases
// zero except the forget-gate slice of b_ih, which starts at 1.0
ModelParams init_params(std::size_t H, std::size_t I, std::size_t O, rng::RngStream& stream);

// per-window activations cached for backpropagation through time
struct ForwardTape {
    std::size_t L = 0;
    std::vector<double> x;      // L x I
    std::vector<double> gates;  // L x 4H, post-activation, (i,f,g,o)
    std::vector<double> c;      // L x H
    std::vector<double> tc;     // L x H, tanh(c)
    std::vector<double> h;      // L x H
    std::vector<double> pred;   // O
};

// runs L steps from zero initial hidden/cell state; throws std::runtime_error
// naming the step if an intermediate goes non-finite
void forward(const ModelParams& p, const double* window, std::size_t L, ForwardTape& tape);
std::pair<std::vector<double>, ForwardTape> forward(const ModelParams& p,
                                                    const std::vector<double>& window);

double mse_loss(const double* pred, const double* target, std::size_t O);
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target);

// accumulates d(mse_loss)/d(params) into grad (size = p.count())
void backward_acc(const ModelParams& p, const ForwardTape& tape, const double* target,
                  std::vector<double>& grad);
std::vector<double> backward(const ModelParams& p, const ForwardTape& tape,
                             const std::vector<double>& target);

struct AdamState {
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m;
    std::vector<double> v;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(ModelParams& p, const std::vector<double>& grad, AdamState& st);

// one pass over the training windows in a freshly shuffled order,
// mini-batches of `batch` (gradients averaged within a batch), one Adam step
// per batch; returns the mean per-window loss observed during the pass
double train_epoch(ModelParams& p, AdamState& opt, const WindowedDataset& train,
                   std::size_t batch, rng::RngStream& shuffle_stream);

// "D3FL1" magic, dims as decimal text, flat params as little-endian float64
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace d3fl::model
