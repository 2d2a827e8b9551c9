#pragma once

#include <cstddef>

// Reference kernels, templated on the scalar type so the same loops can run
// on plain doubles (scalar backend) or on a counting scalar (FLOP
// instrumentation). These define the semantics the SIMD variants must match.

namespace phasepos::kernels::ref {

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s = s + a[i] * b[i];
    return s;
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

template <class T>
void matvec(const T* w, std::size_t rows, std::size_t cols, const T* x, const T* b,
            T* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        T s = dot(w + r * cols, x, cols);
        y[r] = b ? s + b[r] : s;
    }
}

template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
             std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot(a + i * k, b + j * k, k);
}

template <class T>
void gemm_nn_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
                 std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, c + i * n, n);
}

template <class T>
void gemm_tn_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
                 std::size_t k) {
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) axpy(a[p * m + i], b + p * n, c + i * n, n);
}

template <class T>
void add_row(T* x, std::size_t nrows, std::size_t ncols, const T* v) {
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t j = 0; j < ncols; ++j) x[r * ncols + j] = x[r * ncols + j] + v[j];
}

template <class T>
void relu(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!(x[i] > T{})) x[i] = T{};
}

template <class T>
void relu_backward(const T* y, T* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!(y[i] > T{})) g[i] = T{};
}

template <class T>
T sum_sq_diff(const T* a, const T* b, std::size_t n) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) {
        T d = a[i] - b[i];
        s = s + d * d;
    }
    return s;
}

}  // namespace phasepos::kernels::ref
