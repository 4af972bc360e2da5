#include "kernels_detail.hpp"

#include <cfloat>
#include <cmath>

// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma, and it is built with -ffp-contract=off so that separately
// written mul/add sequences stay separate. Elementwise kernels (axpy, add,
// scale, matvec_t, rank1_acc, minmax, adam_update) perform the exact same
// per-element operation sequence as the scalar reference and match it
// bitwise. Reductions (dot, sum*, matvec) use vector lane accumulators, so
// they agree with the reference only up to rounding; the transcendentals use
// a polynomial exp and agree to a few ulp. Tests encode exactly this split.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace d3fl::kernels::avx2_impl {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d abs_pd(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// exp() after Cephes cephes/exp.c: argument reduction against log2(e) in two
// parts, degree-2/3 rational approximation in x^2, then scaling by 2^n via
// exponent-field arithmetic. Inputs are pre-clamped to [-700, 700], which
// keeps n in [-1011, 1011] and the result inside the normal range.
constexpr double kExpLog2e = 1.4426950408889634073599;
constexpr double kExpC1 = 6.93145751953125e-1;
constexpr double kExpC2 = 1.42860682030941723212e-6;
constexpr double kExpP0 = 1.26177193074810590878e-4;
constexpr double kExpP1 = 3.02994407707441961300e-2;
constexpr double kExpP2 = 9.99999999999999999910e-1;
constexpr double kExpQ0 = 3.00198505138664455042e-6;
constexpr double kExpQ1 = 2.52448340349684104192e-3;
constexpr double kExpQ2 = 2.27265548208155028766e-1;
constexpr double kExpQ3 = 2.00000000000000000005e0;

inline __m256d exp_pd(__m256d x) {
    // Constant-first operand order keeps NaN inputs flowing through.
    x = _mm256_max_pd(_mm256_set1_pd(-700.0), x);
    x = _mm256_min_pd(_mm256_set1_pd(700.0), x);

    __m256d px = _mm256_floor_pd(
        _mm256_fmadd_pd(_mm256_set1_pd(kExpLog2e), x, _mm256_set1_pd(0.5)));
    __m128i n32 = _mm256_cvttpd_epi32(px);

    x = _mm256_fnmadd_pd(px, _mm256_set1_pd(kExpC1), x);
    x = _mm256_fnmadd_pd(px, _mm256_set1_pd(kExpC2), x);

    __m256d xx = _mm256_mul_pd(x, x);
    __m256d p = _mm256_set1_pd(kExpP0);
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP1));
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP2));
    p = _mm256_mul_pd(p, x);
    __m256d q = _mm256_set1_pd(kExpQ0);
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ1));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ2));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ3));
    __m256d y = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    y = _mm256_fmadd_pd(_mm256_set1_pd(2.0), y, _mm256_set1_pd(1.0));

    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
    __m256d pow2n = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
    return _mm256_mul_pd(y, pow2n);
}

inline __m256d sigmoid_pd(__m256d x) {
    __m256d t = exp_pd(_mm256_xor_pd(x, _mm256_set1_pd(-0.0)));
    return _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_add_pd(_mm256_set1_pd(1.0), t));
}

// tanh() after Cephes cephes/tanh.c: rational polynomial below |x| = 0.625
// (the exp identity cancels badly there), 1 - 2/(exp(2|x|)+1) above, sign
// restored at the end. Both branches are evaluated and blended.
constexpr double kTanhP0 = -9.64399179425052238628e-1;
constexpr double kTanhP1 = -9.92877231001918586564e1;
constexpr double kTanhP2 = -1.61468768441708447952e3;
constexpr double kTanhQ0 = 1.12811678491632931402e2;
constexpr double kTanhQ1 = 2.23548839060100448583e3;
constexpr double kTanhQ2 = 4.84406305325125486048e3;

inline __m256d tanh_pd(__m256d x) {
    const __m256d sign = _mm256_and_pd(x, _mm256_set1_pd(-0.0));
    const __m256d a = abs_pd(x);

    __m256d xx = _mm256_mul_pd(a, a);
    __m256d p = _mm256_set1_pd(kTanhP0);
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kTanhP1));
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kTanhP2));
    __m256d q = _mm256_add_pd(xx, _mm256_set1_pd(kTanhQ0));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kTanhQ1));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kTanhQ2));
    __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(a, xx), _mm256_div_pd(p, q), a);

    __m256d e = exp_pd(_mm256_add_pd(a, a));
    __m256d big = _mm256_sub_pd(
        _mm256_set1_pd(1.0),
        _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(e, _mm256_set1_pd(1.0))));

    __m256d mask = _mm256_cmp_pd(a, _mm256_set1_pd(0.625), _CMP_GE_OQ);
    return _mm256_or_pd(_mm256_blendv_pd(small, big, mask), sign);
}

}  // namespace

void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
        double s = hsum(acc);
        for (; c < cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
}

void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
        double s = hsum(acc);
        for (; c < cols; ++c) s += row[c] * x[c];
        y[r] += s;
    }
}

void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        const __m256d xr = _mm256_set1_pd(x[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + c),
                                      _mm256_mul_pd(_mm256_loadu_pd(row + c), xr));
            _mm256_storeu_pd(y + c, t);
        }
        for (; c < cols; ++c) y[c] += row[c] * x[r];
    }
}

void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = a + r * cols;
        const __m256d ur = _mm256_set1_pd(u[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d t = _mm256_add_pd(_mm256_loadu_pd(row + c),
                                      _mm256_mul_pd(ur, _mm256_loadu_pd(v + c)));
            _mm256_storeu_pd(row + c, t);
        }
        for (; c < cols; ++c) row[c] += u[r] * v[c];
    }
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                  _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, t);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void add(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void scale(double* x, double alpha, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
    for (; i < n; ++i) x[i] *= alpha;
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, abs_pd(d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

std::pair<double, double> minmax(const double* x, std::size_t n) {
    if (n < 4) {
        double lo = x[0], hi = x[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (x[i] < lo) lo = x[i];
            if (x[i] > hi) hi = x[i];
        }
        return {lo, hi};
    }
    __m256d vlo = _mm256_loadu_pd(x);
    __m256d vhi = vlo;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        vlo = _mm256_min_pd(vlo, v);
        vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double tl[4], th[4];
    _mm256_store_pd(tl, vlo);
    _mm256_store_pd(th, vhi);
    double lo = tl[0], hi = th[0];
    for (int k = 1; k < 4; ++k) {
        if (tl[k] < lo) lo = tl[k];
        if (th[k] > hi) hi = th[k];
    }
    for (; i < n; ++i) {
        if (x[i] < lo) lo = x[i];
        if (x[i] > hi) hi = x[i];
    }
    return {lo, hi};
}

bool all_finite(const double* x, std::size_t n) {
    const __m256d limit = _mm256_set1_pd(DBL_MAX);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // Ordered <= is false for NaN lanes and for |x| > DBL_MAX.
        __m256d ok = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), limit, _CMP_LE_OQ);
        if (_mm256_movemask_pd(ok) != 0xF) return false;
    }
    for (; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

// Remainders shorter than one vector are padded with zeros and pushed
// through the same lane code so every element of an array takes an
// identical path.
void vexp(double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, exp_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
        _mm256_store_pd(buf, exp_pd(_mm256_load_pd(buf)));
        for (std::size_t k = i; k < n; ++k) x[k] = buf[k - i];
    }
}

void sigmoid(double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, sigmoid_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
        _mm256_store_pd(buf, sigmoid_pd(_mm256_load_pd(buf)));
        for (std::size_t k = i; k < n; ++k) x[k] = buf[k - i];
    }
}

void vtanh(double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, tanh_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
        _mm256_store_pd(buf, tanh_pd(_mm256_load_pd(buf)));
        for (std::size_t k = i; k < n; ++k) x[k] = buf[k - i];
    }
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                   _mm256_mul_pd(omb1, gv));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(_mm256_mul_pd(omb2, gv), gv));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, bc1v);
        const __m256d vhat = _mm256_div_pd(vv, bc2v);
        __m256d upd = _mm256_div_pd(_mm256_mul_pd(lrv, mhat),
                                    _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace d3fl::kernels::avx2_impl

#else  // no AVX2+FMA at compile time: forward to the reference so the
       // symbol set stays identical (the dispatcher never selects these).

namespace d3fl::kernels::avx2_impl {

namespace ref = d3fl::kernels::scalar_impl;

void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    ref::matvec(a, x, y, rows, cols);
}
void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    ref::matvec_acc(a, x, y, rows, cols);
}
void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    ref::matvec_t(a, x, y, rows, cols);
}
void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols) {
    ref::rank1_acc(a, u, v, rows, cols);
}
double dot(const double* x, const double* y, std::size_t n) { return ref::dot(x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { ref::axpy(alpha, x, y, n); }
void add(const double* x, double* y, std::size_t n) { ref::add(x, y, n); }
void scale(double* x, double alpha, std::size_t n) { ref::scale(x, alpha, n); }
double sum(const double* x, std::size_t n) { return ref::sum(x, n); }
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return ref::sum_sq_diff(a, b, n);
}
double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    return ref::sum_abs_diff(a, b, n);
}
std::pair<double, double> minmax(const double* x, std::size_t n) { return ref::minmax(x, n); }
bool all_finite(const double* x, std::size_t n) { return ref::all_finite(x, n); }
void vexp(double* x, std::size_t n) { ref::vexp(x, n); }
void sigmoid(double* x, std::size_t n) { ref::sigmoid(x, n); }
void vtanh(double* x, std::size_t n) { ref::vtanh(x, n); }
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps) {
    ref::adam_update(p, g, m, v, n, step, lr, beta1, beta2, eps);
}

}  // namespace d3fl::kernels::avx2_impl

#endif
