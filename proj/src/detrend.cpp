#include "d3fl/detrend.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "d3fl/kernels.hpp"

namespace d3fl::detrend {

namespace {

void require_finite(const std::vector<double>& series) {
    if (!kernels::all_finite(series.data(), series.size()))
        throw std::runtime_error("detrend: input contains non-finite values");
}

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// solve A x = b in place, partial pivoting; A is dim x dim, row-major
void solve_pivoted(long double* a, long double* b, int dim) {
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r)
            if (fabsl(a[r * dim + col]) > fabsl(a[pivot * dim + col])) pivot = r;
        if (fabsl(a[pivot * dim + col]) < 1e-30L)
            throw std::runtime_error("least_squares: singular normal equations");
        if (pivot != col) {
            for (int c = 0; c < dim; ++c) std::swap(a[col * dim + c], a[pivot * dim + c]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < dim; ++r) {
            const long double f = a[r * dim + col] / a[col * dim + col];
            for (int c = col; c < dim; ++c) a[r * dim + c] -= f * a[col * dim + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = dim - 1; r >= 0; --r) {
        long double acc = b[r];
        for (int c = r + 1; c < dim; ++c) acc -= a[r * dim + c] * b[c];
        b[r] = acc / a[r * dim + r];
    }
}

}  // namespace

std::string_view technique_name(Technique t) {
    switch (t) {
        case Technique::none: return "none";
        case Technique::differencing: return "differencing";
        case Technique::moving_average: return "moving_average";
        case Technique::subtract_mean: return "subtract_mean";
        case Technique::linear_model: return "linear_model";
        case Technique::quadratic_model: return "quadratic_model";
    }
    return "none";
}

Technique parse_technique(std::string_view name) {
    for (Technique t : {Technique::none, Technique::differencing, Technique::moving_average,
                        Technique::subtract_mean, Technique::linear_model,
                        Technique::quadratic_model})
        if (name == technique_name(t)) return t;
    throw std::invalid_argument("unknown detrending technique: " + std::string(name));
}

std::vector<double> least_squares_fit(const std::vector<double>& values, int degree) {
    if (degree != 1 && degree != 2)
        throw std::invalid_argument("least_squares_fit: degree must be 1 or 2");
    const std::size_t n = values.size();
    if (n < static_cast<std::size_t>(degree) + 1)
        throw std::length_error("least_squares_fit: series shorter than degree+1");

    const int dim = degree + 1;
    const long double c = (static_cast<long double>(n) - 1.0L) / 2.0L;

    // Gram matrix of the centered monomials and the matching moment vector
    long double mom[5] = {0, 0, 0, 0, 0};  // sum of j^k
    long double rhs[3] = {0, 0, 0};        // sum of y * j^k
    for (std::size_t i = 0; i < n; ++i) {
        const long double j = static_cast<long double>(i) - c;
        long double jk = 1.0L;
        for (int k = 0; k <= 2 * degree; ++k) {
            mom[k] += jk;
            if (k <= degree) rhs[k] += values[i] * jk;
            jk *= j;
        }
    }
    long double gram[9];
    for (int r = 0; r < dim; ++r)
        for (int col = 0; col < dim; ++col) gram[r * dim + col] = mom[r + col];
    solve_pivoted(gram, rhs, dim);

    // shift centered coefficients a(j) back to the raw index basis b(i)
    const long double a0 = rhs[0], a1 = rhs[1], a2 = degree == 2 ? rhs[2] : 0.0L;
    std::vector<double> beta(dim);
    beta[0] = static_cast<double>(a0 - a1 * c + a2 * c * c);
    beta[1] = static_cast<double>(a1 - 2.0L * a2 * c);
    if (degree == 2) beta[2] = static_cast<double>(a2);
    return beta;
}

std::pair<std::vector<double>, DetrendState> apply(const std::vector<double>& series,
                                                   const DetrendTechnique& tech) {
    const std::size_t n = series.size();
    const std::size_t p = tech.window;
    if (tech.tag == Technique::moving_average && p < 2)
        throw std::invalid_argument("moving_average window must be >= 2");
    const std::size_t min_len = tech.tag == Technique::moving_average ? std::max<std::size_t>(2, p)
                                                                      : 2;
    if (n < min_len) {
        std::ostringstream os;
        os << "detrend: series of length " << n << " is too short for "
           << technique_name(tech.tag);
        throw std::length_error(os.str());
    }
    require_finite(series);

    DetrendState state;
    state.tag = tech.tag;
    state.n = n;

    std::vector<double> out;
    switch (tech.tag) {
        case Technique::none:
            out = series;
            break;
        case Technique::differencing:
            state.anchor = series[0];
            out.resize(n - 1);
            for (std::size_t i = 0; i + 1 < n; ++i) out[i] = series[i + 1] - series[i];
            break;
        case Technique::moving_average: {
            state.window = p;
            state.prefix.assign(series.begin(), series.begin() + (p - 1));
            const std::size_t m = n - p + 1;
            state.means.resize(m);
            out.resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                state.means[i] = kernels::sum(series.data() + i, p) / static_cast<double>(p);
                out[i] = series[i + p - 1] - state.means[i];
            }
            break;
        }
        case Technique::subtract_mean: {
            const double mean = kernels::sum(series.data(), n) / static_cast<double>(n);
            state.beta = {mean};
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = series[i] - mean;
            break;
        }
        case Technique::linear_model:
        case Technique::quadratic_model: {
            state.beta = least_squares_fit(series, tech.tag == Technique::linear_model ? 1 : 2);
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = series[i] - trend_at(state, i);
            break;
        }
    }
    return {std::move(out), std::move(state)};
}

std::vector<double> retrend(const std::vector<double>& detrended, const DetrendState& state) {
    const std::size_t n = state.n;
    std::size_t expect;
    switch (state.tag) {
        case Technique::differencing: expect = n - 1; break;
        case Technique::moving_average: expect = n - state.window + 1; break;
        default: expect = n;
    }
    if (detrended.size() != expect) {
        std::ostringstream os;
        os << "retrend: expected " << expect << " values for " << technique_name(state.tag)
           << " state of length " << n << ", got " << detrended.size();
        throw std::runtime_error(os.str());
    }

    std::vector<double> out;
    switch (state.tag) {
        case Technique::none:
            out = detrended;
            break;
        case Technique::differencing: {
            out.resize(n);
            out[0] = state.anchor;
            for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + detrended[i - 1];
            break;
        }
        case Technique::moving_average: {
            out = state.prefix;
            out.resize(n);
            for (std::size_t i = 0; i < detrended.size(); ++i)
                out[state.window - 1 + i] = detrended[i] + state.means[i];
            break;
        }
        default: {
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = detrended[i] + trend_at(state, i);
        }
    }
    return out;
}

double trend_at(const DetrendState& state, std::size_t i) {
    const double x = static_cast<double>(i);
    switch (state.tag) {
        case Technique::subtract_mean: return state.beta[0];
        case Technique::linear_model: return state.beta[0] + state.beta[1] * x;
        case Technique::quadratic_model:
            return state.beta[0] + state.beta[1] * x + state.beta[2] * x * x;
        default:
            throw std::invalid_argument(std::string("trend_at: no trend curve for ") +
                                        std::string(technique_name(state.tag)));
    }
}

void save_state(const DetrendState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "technique = " << technique_name(state.tag) << '\n';
    out << "n = " << state.n << '\n';
    switch (state.tag) {
        case Technique::differencing:
            out << "anchor = " << format17(state.anchor) << '\n';
            break;
        case Technique::moving_average: {
            out << "window = " << state.window << '\n';
            out << "prefix =";
            for (double v : state.prefix) out << ' ' << format17(v);
            out << "\nmeans =";
            for (double v : state.means) out << ' ' << format17(v);
            out << '\n';
            break;
        }
        case Technique::subtract_mean:
        case Technique::linear_model:
        case Technique::quadratic_model: {
            out << "beta =";
            for (double v : state.beta) out << ' ' << format17(v);
            out << '\n';
            break;
        }
        case Technique::none: break;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

DetrendState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    DetrendState state;
    bool saw_technique = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed sidecar line '" + line + "'");
        std::string key = line.substr(0, eq);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::istringstream rest(line.substr(eq + 1));
        if (key == "technique") {
            std::string name;
            rest >> name;
            state.tag = parse_technique(name);
            saw_technique = true;
        } else if (key == "n") {
            rest >> state.n;
        } else if (key == "window") {
            rest >> state.window;
        } else if (key == "anchor") {
            rest >> state.anchor;
        } else if (key == "prefix" || key == "means" || key == "beta") {
            std::vector<double>& dst = key == "prefix" ? state.prefix
                                       : key == "means" ? state.means
                                                        : state.beta;
            double v;
            while (rest >> v) dst.push_back(v);
        } else {
            throw std::runtime_error(path + ": unknown sidecar key '" + key + "'");
        }
    }
    if (!saw_technique) throw std::runtime_error(path + ": missing technique");
    return state;
}

}  // namespace d3fl::detrend
