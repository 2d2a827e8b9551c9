// AVX2/FMA variants of the dense kernels. Only reached through the dispatch
// table after a runtime CPU check, so this file may be compiled with
// -mavx2 -mfma while the rest of the build stays generic.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernels/vtable.hpp"

namespace phasepos::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                               acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
            const double* b, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = dot(w + r * cols, x, cols);
        y[r] = b ? s + b[r] : s;
    }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        std::size_t j = 0;
        // two B rows per pass share the A row loads
        for (; j + 2 <= n; j += 2) {
            const double* b0 = b + j * k;
            const double* b1 = b + (j + 1) * k;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            std::size_t p = 0;
            for (; p + 4 <= k; p += 4) {
                __m256d av = _mm256_loadu_pd(arow + p);
                acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), acc0);
                acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), acc1);
            }
            double s0 = hsum(acc0), s1 = hsum(acc1);
            for (; p < k; ++p) {
                s0 += arow[p] * b0[p];
                s1 += arow[p] * b1[p];
            }
            crow[j] = s0;
            crow[j + 1] = s1;
        }
        for (; j < n; ++j) crow[j] = dot(arow, b + j * k, k);
    }
}

void gemm_nn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, c + i * n, n);
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k) {
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) axpy(a[p * m + i], b + p * n, c + i * n, n);
}

void add_row(double* x, std::size_t nrows, std::size_t ncols, const double* v) {
    for (std::size_t r = 0; r < nrows; ++r) {
        double* row = x + r * ncols;
        std::size_t j = 0;
        for (; j + 4 <= ncols; j += 4) {
            __m256d s = _mm256_add_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(v + j));
            _mm256_storeu_pd(row + j, s);
        }
        for (; j < ncols; ++j) row[j] += v[j];
    }
}

void relu(double* x, std::size_t n) {
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i)
        if (!(x[i] > 0.0)) x[i] = 0.0;
}

void relu_backward(const double* y, double* g, std::size_t n) {
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), mask));
    }
    for (; i < n; ++i)
        if (!(y[i] > 0.0)) g[i] = 0.0;
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
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Kept FMA-free so the per-element results match the scalar backend bit for
// bit (mul/add/sqrt/div are all correctly rounded).
void adam_update(double* w, double* m, double* v, const double* g, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double c1,
                 double c2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vo1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vo2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vc1 = _mm256_set1_pd(c1);
    const __m256d vc2 = _mm256_set1_pd(c2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                   _mm256_mul_pd(vo1, vg));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(vo2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        __m256d mhat = _mm256_mul_pd(vm, vc1);
        __m256d vhat = _mm256_mul_pd(vv, vc2);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
    }
    const double om1 = 1.0 - beta1;
    const double om2 = 1.0 - beta2;
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + om1 * g[i];
        v[i] = beta2 * v[i] + om2 * (g[i] * g[i]);
        double mhat = m[i] * c1;
        double vhat = v[i] * c2;
        w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

extern const Vtable vtable = {
    dot,         axpy,        matvec,  gemm_nt,       gemm_nn_acc, gemm_tn_acc,
    add_row,     relu,        relu_backward, sum_sq_diff, adam_update,
};

}  // namespace phasepos::kernels::avx2
