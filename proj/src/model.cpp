#include "d3fl/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "d3fl/kernels.hpp"

namespace d3fl::model {

namespace k = d3fl::kernels;

Scaler fit_scaler(const std::vector<double>& series, std::size_t count) {
    if (count < 2 || count > series.size())
        throw std::length_error("fit_scaler: need at least two values inside the series");
    Scaler s;
    const auto [lo, hi] = k::minmax(series.data(), count);
    s.min = lo;
    s.max = hi;
    s.degenerate = !(hi > lo);
    return s;
}

double scale_value(double x, const Scaler& s) {
    return s.degenerate ? 0.0 : (x - s.min) / (s.max - s.min);
}

double inverse_scale(double y, const Scaler& s) {
    return s.degenerate ? s.min : s.min + y * (s.max - s.min);
}

std::vector<double> apply_scaler(const std::vector<double>& series, const Scaler& s) {
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = scale_value(series[i], s);
    return out;
}

std::pair<std::vector<double>, Scaler> min_max_scale(const std::vector<double>& series) {
    const Scaler s = fit_scaler(series, series.size());
    return {apply_scaler(series, s), s};
}

WindowedDataset make_windows(const std::vector<double>& scaled, std::size_t L, std::size_t O) {
    if (L < 1 || O < 1) throw std::invalid_argument("make_windows: L and O must be >= 1");
    if (scaled.size() < L + O)
        throw std::length_error("make_windows: series shorter than lookback + horizon");
    WindowedDataset ds;
    ds.L = L;
    ds.O = O;
    const std::size_t n = scaled.size() - L - O + 1;
    ds.inputs.resize(n * L);
    ds.targets.resize(n * O);
    for (std::size_t w = 0; w < n; ++w) {
        std::copy(scaled.begin() + w, scaled.begin() + w + L, ds.inputs.begin() + w * L);
        std::copy(scaled.begin() + w + L, scaled.begin() + w + L + O,
                  ds.targets.begin() + w * O);
    }
    return ds;
}

std::pair<WindowedDataset, WindowedDataset> chrono_split(const WindowedDataset& ds,
                                                         double train_frac) {
    const std::size_t n = ds.size();
    if (n < 2) throw std::length_error("chrono_split: need at least two windows");
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw std::length_error("chrono_split: split leaves an empty side");

    auto slice = [&](std::size_t from, std::size_t to) {
        WindowedDataset part;
        part.L = ds.L;
        part.O = ds.O;
        part.scaler = ds.scaler;
        part.inputs.assign(ds.inputs.begin() + from * ds.L, ds.inputs.begin() + to * ds.L);
        part.targets.assign(ds.targets.begin() + from * ds.O, ds.targets.begin() + to * ds.O);
        return part;
    };
    return {slice(0, n_train), slice(n_train, n)};
}

const std::vector<double>& flatten(const ModelParams& p) { return p.flat; }

ModelParams unflatten(std::vector<double> flat, std::size_t H, std::size_t I, std::size_t O) {
    if (flat.size() != ModelParams::param_count(H, I, O))
        throw std::invalid_argument("unflatten: vector length does not match the shape");
    ModelParams p;
    p.H = H;
    p.I = I;
    p.O = O;
    p.flat = std::move(flat);
    return p;
}

ModelParams init_params(std::size_t H, std::size_t I, std::size_t O, rng::RngStream& stream) {
    if (H < 1 || I < 1 || O < 1) throw std::invalid_argument("init_params: dims must be >= 1");
    ModelParams p;
    p.H = H;
    p.I = I;
    p.O = O;
    p.flat.assign(p.count(), 0.0);

    const double bound = 1.0 / std::sqrt(static_cast<double>(H));
    auto draw = [&](std::size_t off, std::size_t n) {
        for (std::size_t j = 0; j < n; ++j)
            p.flat[off + j] = -bound + 2.0 * bound * stream.uniform01();
    };
    draw(p.off_w_ih(), 4 * H * I);
    draw(p.off_w_hh(), 4 * H * H);
    draw(p.off_w_fc(), O * H);
    // biases stay zero except the forget gate, which starts open
    double* b_ih = p.flat.data() + p.off_b_ih();
    for (std::size_t j = H; j < 2 * H; ++j) b_ih[j] = 1.0;
    return p;
}

void forward(const ModelParams& p, const double* window, std::size_t L, ForwardTape& tape) {
    const std::size_t H = p.H, I = p.I, O = p.O;
    tape.L = L;
    tape.x.assign(window, window + L * I);
    tape.gates.resize(L * 4 * H);
    tape.c.resize(L * H);
    tape.tc.resize(L * H);
    tape.h.resize(L * H);
    tape.pred.resize(O);

    // per-step bias base: the coupled sum b_ih + b_hh
    std::vector<double> base(p.b_ih(), p.b_ih() + 4 * H);
    k::add(p.b_hh(), base.data(), 4 * H);

    std::vector<double> a(4 * H);
    const double* h_prev = nullptr;
    const double* c_prev = nullptr;
    for (std::size_t t = 0; t < L; ++t) {
        std::copy(base.begin(), base.end(), a.begin());
        k::matvec_acc(p.w_ih(), window + t * I, a.data(), 4 * H, I);
        if (t > 0) k::matvec_acc(p.w_hh(), h_prev, a.data(), 4 * H, H);

        k::sigmoid(a.data(), 2 * H);           // i, f
        k::vtanh(a.data() + 2 * H, H);         // g
        k::sigmoid(a.data() + 3 * H, H);       // o
        std::copy(a.begin(), a.end(), tape.gates.begin() + t * 4 * H);

        const double* gi = a.data();
        const double* gf = a.data() + H;
        const double* gg = a.data() + 2 * H;
        const double* go = a.data() + 3 * H;
        double* c = tape.c.data() + t * H;
        double* tc = tape.tc.data() + t * H;
        double* h = tape.h.data() + t * H;
        for (std::size_t j = 0; j < H; ++j)
            c[j] = (t > 0 ? gf[j] * c_prev[j] : 0.0) + gi[j] * gg[j];
        std::copy(c, c + H, tc);
        k::vtanh(tc, H);
        for (std::size_t j = 0; j < H; ++j) h[j] = go[j] * tc[j];

        if (!k::all_finite(c, H) || !k::all_finite(h, H)) {
            std::ostringstream os;
            os << "forward: non-finite state at step " << t;
            throw std::runtime_error(os.str());
        }
        h_prev = h;
        c_prev = c;
    }

    std::copy(p.b_fc(), p.b_fc() + O, tape.pred.begin());
    k::matvec_acc(p.w_fc(), tape.h.data() + (L - 1) * H, tape.pred.data(), O, H);
}

std::pair<std::vector<double>, ForwardTape> forward(const ModelParams& p,
                                                    const std::vector<double>& window) {
    if (window.size() % p.I != 0)
        throw std::invalid_argument("forward: window length not a multiple of input size");
    ForwardTape tape;
    forward(p, window.data(), window.size() / p.I, tape);
    return {tape.pred, std::move(tape)};
}

double mse_loss(const double* pred, const double* target, std::size_t O) {
    return k::sum_sq_diff(pred, target, O) / static_cast<double>(O);
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("mse_loss: prediction/target length mismatch");
    return mse_loss(pred.data(), target.data(), pred.size());
}

void backward_acc(const ModelParams& p, const ForwardTape& tape, const double* target,
                  std::vector<double>& grad) {
    const std::size_t H = p.H, I = p.I, O = p.O, L = tape.L;
    if (grad.size() != p.count())
        throw std::invalid_argument("backward: gradient buffer has the wrong size");

    double* g_w_ih = grad.data() + p.off_w_ih();
    double* g_w_hh = grad.data() + p.off_w_hh();
    double* g_b_ih = grad.data() + p.off_b_ih();
    double* g_b_hh = grad.data() + p.off_b_hh();
    double* g_w_fc = grad.data() + p.off_w_fc();
    double* g_b_fc = grad.data() + p.off_b_fc();

    std::vector<double> dpred(O);
    for (std::size_t j = 0; j < O; ++j)
        dpred[j] = 2.0 * (tape.pred[j] - target[j]) / static_cast<double>(O);

    k::add(dpred.data(), g_b_fc, O);
    k::rank1_acc(g_w_fc, dpred.data(), tape.h.data() + (L - 1) * H, O, H);

    std::vector<double> dh(H);
    k::matvec_t(p.w_fc(), dpred.data(), dh.data(), O, H);
    std::vector<double> dc(H, 0.0);
    std::vector<double> da(4 * H);
    std::vector<double> dh_prev(H);

    for (std::size_t t = L; t-- > 0;) {
        const double* gi = tape.gates.data() + t * 4 * H;
        const double* gf = gi + H;
        const double* gg = gi + 2 * H;
        const double* go = gi + 3 * H;
        const double* tc = tape.tc.data() + t * H;
        const double* c_prev = t > 0 ? tape.c.data() + (t - 1) * H : nullptr;

        for (std::size_t j = 0; j < H; ++j) {
            const double dout = dh[j] * tc[j];
            dc[j] += dh[j] * go[j] * (1.0 - tc[j] * tc[j]);
            const double di = dc[j] * gg[j];
            const double df = t > 0 ? dc[j] * c_prev[j] : 0.0;
            const double dg = dc[j] * gi[j];
            da[j] = di * gi[j] * (1.0 - gi[j]);
            da[H + j] = df * gf[j] * (1.0 - gf[j]);
            da[2 * H + j] = dg * (1.0 - gg[j] * gg[j]);
            da[3 * H + j] = dout * go[j] * (1.0 - go[j]);
        }

        k::add(da.data(), g_b_ih, 4 * H);
        k::add(da.data(), g_b_hh, 4 * H);
        k::rank1_acc(g_w_ih, da.data(), tape.x.data() + t * I, 4 * H, I);
        if (t > 0) {
            k::rank1_acc(g_w_hh, da.data(), tape.h.data() + (t - 1) * H, 4 * H, H);
            k::matvec_t(p.w_hh(), da.data(), dh_prev.data(), 4 * H, H);
            std::copy(dh_prev.begin(), dh_prev.end(), dh.begin());
            for (std::size_t j = 0; j < H; ++j) dc[j] *= gf[j];
        }
    }
}

std::vector<double> backward(const ModelParams& p, const ForwardTape& tape,
                             const std::vector<double>& target) {
    if (target.size() != p.O) throw std::invalid_argument("backward: target length mismatch");
    std::vector<double> grad(p.count(), 0.0);
    backward_acc(p, tape, target.data(), grad);
    return grad;
}

void adam_step(ModelParams& p, const std::vector<double>& grad, AdamState& st) {
    if (grad.size() != p.count() || st.m.size() != p.count() || st.v.size() != p.count())
        throw std::invalid_argument("adam_step: shape mismatch");
    ++st.t;
    k::adam_update(p.flat.data(), grad.data(), st.m.data(), st.v.data(), p.count(), st.t,
                   st.lr, st.beta1, st.beta2, st.eps);
}

double train_epoch(ModelParams& p, AdamState& opt, const WindowedDataset& train,
                   std::size_t batch, rng::RngStream& shuffle_stream) {
    const std::size_t n = train.size();
    if (n == 0) throw std::invalid_argument("train_epoch: empty training set");
    if (batch == 0) throw std::invalid_argument("train_epoch: batch must be >= 1");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng::shuffle_indices(order, shuffle_stream);

    ForwardTape tape;
    std::vector<double> grad(p.count());
    double loss_total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t bsize = std::min(batch, n - start);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = 0; b < bsize; ++b) {
            const std::size_t w = order[start + b];
            forward(p, train.input(w), train.L, tape);
            loss_total += mse_loss(tape.pred.data(), train.target(w), train.O);
            backward_acc(p, tape, train.target(w), grad);
        }
        k::scale(grad.data(), 1.0 / static_cast<double>(bsize), grad.size());
        adam_step(p, grad, opt);
    }
    return loss_total / static_cast<double>(n);
}

namespace {

void put_u64_le(std::ofstream& out, std::uint64_t bits) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return bits;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "D3FL1\n" << p.H << ' ' << p.I << ' ' << p.O << '\n';
    for (double v : p.flat) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "D3FL1") throw std::runtime_error(path + ": not a d3fl checkpoint");
    std::size_t H = 0, I = 0, O = 0;
    in >> H >> I >> O;
    in.ignore(1, '\n');
    if (!in || H < 1 || I < 1 || O < 1)
        throw std::runtime_error(path + ": malformed checkpoint header");

    ModelParams p;
    p.H = H;
    p.I = I;
    p.O = O;
    p.flat.resize(p.count());
    for (double& v : p.flat) {
        v = std::bit_cast<double>(get_u64_le(in));
        if (!in) throw std::runtime_error(path + ": truncated checkpoint");
    }
    in.peek();
    if (!in.eof()) throw std::runtime_error(path + ": trailing bytes after parameters");
    return p;
}

}  // namespace d3fl::model
