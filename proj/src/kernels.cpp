#include "d3fl/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "kernels_detail.hpp"

namespace d3fl::kernels {

namespace {

struct Vtable {
    void (*matvec)(const double*, const double*, double*, std::size_t, std::size_t);
    void (*matvec_acc)(const double*, const double*, double*, std::size_t, std::size_t);
    void (*matvec_t)(const double*, const double*, double*, std::size_t, std::size_t);
    void (*rank1_acc)(double*, const double*, const double*, std::size_t, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*add)(const double*, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_sq_diff)(const double*, const double*, std::size_t);
    double (*sum_abs_diff)(const double*, const double*, std::size_t);
    std::pair<double, double> (*minmax)(const double*, std::size_t);
    bool (*all_finite)(const double*, std::size_t);
    void (*vexp)(double*, std::size_t);
    void (*sigmoid)(double*, std::size_t);
    void (*vtanh)(double*, std::size_t);
    void (*adam_update)(double*, const double*, double*, double*, std::size_t,
                        long, double, double, double, double);
};

constexpr Vtable kScalar = {
    scalar_impl::matvec,       scalar_impl::matvec_acc,   scalar_impl::matvec_t,
    scalar_impl::rank1_acc,    scalar_impl::dot,          scalar_impl::axpy,
    scalar_impl::add,          scalar_impl::scale,        scalar_impl::sum,
    scalar_impl::sum_sq_diff,  scalar_impl::sum_abs_diff, scalar_impl::minmax,
    scalar_impl::all_finite,   scalar_impl::vexp,         scalar_impl::sigmoid,
    scalar_impl::vtanh,        scalar_impl::adam_update,
};

constexpr Vtable kAvx2 = {
    avx2_impl::matvec,       avx2_impl::matvec_acc,   avx2_impl::matvec_t,
    avx2_impl::rank1_acc,    avx2_impl::dot,          avx2_impl::axpy,
    avx2_impl::add,          avx2_impl::scale,        avx2_impl::sum,
    avx2_impl::sum_sq_diff,  avx2_impl::sum_abs_diff, avx2_impl::minmax,
    avx2_impl::all_finite,   avx2_impl::vexp,         avx2_impl::sigmoid,
    avx2_impl::vtanh,        avx2_impl::adam_update,
};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_initial() {
    if (const char* env = std::getenv("D3FL_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = pick_initial();

const Vtable& table() { return g_backend == Backend::avx2 ? kAvx2 : kScalar; }

}  // namespace

Backend active_backend() { return g_backend; }

bool backend_supported(Backend b) {
    return b == Backend::scalar || cpu_has_avx2();
}

bool set_backend(Backend b) {
    if (!backend_supported(b)) return false;
    g_backend = b;
    return true;
}

std::string_view backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    table().matvec(a, x, y, rows, cols);
}
void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    table().matvec_acc(a, x, y, rows, cols);
}
void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    table().matvec_t(a, x, y, rows, cols);
}
void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols) {
    table().rank1_acc(a, u, v, rows, cols);
}
double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    table().axpy(alpha, x, y, n);
}
void add(const double* x, double* y, std::size_t n) { table().add(x, y, n); }
void scale(double* x, double alpha, std::size_t n) { table().scale(x, alpha, n); }
double sum(const double* x, std::size_t n) { return table().sum(x, n); }
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return table().sum_sq_diff(a, b, n);
}
double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    return table().sum_abs_diff(a, b, n);
}
std::pair<double, double> minmax(const double* x, std::size_t n) { return table().minmax(x, n); }
bool all_finite(const double* x, std::size_t n) { return table().all_finite(x, n); }
void vexp(double* x, std::size_t n) { table().vexp(x, n); }
void sigmoid(double* x, std::size_t n) { table().sigmoid(x, n); }
void vtanh(double* x, std::size_t n) { table().vtanh(x, n); }
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps) {
    table().adam_update(p, g, m, v, n, step, lr, beta1, beta2, eps);
}

}  // namespace d3fl::kernels
