#pragma once

#include <cstddef>
#include <utility>

// Implementation namespaces behind the dispatch table in kernels.cpp.
// Signatures mirror d3fl/kernels.hpp exactly.

namespace d3fl::kernels::scalar_impl {
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols);
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
std::pair<double, double> minmax(const double* x, std::size_t n);
bool all_finite(const double* x, std::size_t n);
void vexp(double* x, std::size_t n);
void sigmoid(double* x, std::size_t n);
void vtanh(double* x, std::size_t n);
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps);
}  // namespace d3fl::kernels::scalar_impl

namespace d3fl::kernels::avx2_impl {
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_acc(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void matvec_t(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
void rank1_acc(double* a, const double* u, const double* v, std::size_t rows, std::size_t cols);
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
std::pair<double, double> minmax(const double* x, std::size_t n);
bool all_finite(const double* x, std::size_t n);
void vexp(double* x, std::size_t n);
void sigmoid(double* x, std::size_t n);
void vtanh(double* x, std::size_t n);
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 long step, double lr, double beta1, double beta2, double eps);
}  // namespace d3fl::kernels::avx2_impl
