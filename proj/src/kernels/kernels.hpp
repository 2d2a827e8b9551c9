#pragma once

#include <cstddef>
#include <string>

namespace phasepos::kernels {

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_available(Backend b);

/// Backend in use: best available unless overridden by force_backend() or
/// the PHASEPOS_KERNELS env var (values: "scalar", "avx2").
Backend active_backend();
void force_backend(Backend b);

// Dense double-precision primitives. Matrices are row-major.

double dot(const double* a, const double* b, std::size_t n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// y = W x + b  with W (rows x cols); b may be null.
void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
            const double* b, double* y);

/// C (m x n) = A (m x k) * B(n x k)^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k);

/// C (m x n) += A (m x k) * B (k x n)
void gemm_nn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k);

/// C (m x n) += A (k x m)^T * B (k x n)
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k);

/// each of the nrows rows of x (ncols wide) += v
void add_row(double* x, std::size_t nrows, std::size_t ncols, const double* v);

void relu(double* x, std::size_t n);

/// g[i] := y[i] > 0 ? g[i] : 0, where y is the post-activation output
void relu_backward(const double* y, double* g, std::size_t n);

/// sum((a[i] - b[i])^2)
double sum_sq_diff(const double* a, const double* b, std::size_t n);

/// Adam step with precomputed bias corrections c1 = 1/(1-beta1^t),
/// c2 = 1/(1-beta2^t). Updates w, m, v in place.
void adam_update(double* w, double* m, double* v, const double* g, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double c1,
                 double c2);

}  // namespace phasepos::kernels
