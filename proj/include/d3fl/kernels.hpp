#pragma once

#include <cstddef>
#include <string_view>
#include <utility>

// Double-precision arithmetic kernels behind the LSTM, Adam, FedAvg and
// metric code paths. Every kernel has a scalar reference implementation and
// an AVX2+FMA variant; the active variant is picked once at startup from
// CPU capabilities and can be overridden (tests pin one explicitly, the
// D3FL_KERNELS environment variable accepts "scalar" or "avx2").
//
// Within one process the selected backend never changes mid-run, so repeated
// runs on the same machine produce bit-identical results.

namespace d3fl::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Returns false (and leaves the selection unchanged) if unsupported.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

// y = A x, A row-major rows x cols
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
// y += A x
void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
// y = A^T x, x has rows elements, y has cols elements
void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
// A += u v^T
void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols);

double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha x
void add(const double* x, double* y, std::size_t n);                 // y += x
void scale(double* x, double alpha, std::size_t n);                  // x *= alpha

double sum(const double* x, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
// n >= 1
std::pair<double, double> minmax(const double* x, std::size_t n);
bool all_finite(const double* x, std::size_t n);

// Elementwise transcendentals. Inputs are clamped to [-700, 700] before
// exponentiation so saturated LSTM gates cannot overflow to inf.
void vexp(double* x, std::size_t n);
void sigmoid(double* x, std::size_t n);
void vtanh(double* x, std::size_t n);

// One bias-corrected Adam step over flat arrays; `step` is the 1-based
// iteration count after this update.
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps);

}  // namespace d3fl::kernels
