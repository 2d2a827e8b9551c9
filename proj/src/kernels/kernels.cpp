#include "kernels/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/ref_impl.hpp"
#include "kernels/vtable.hpp"

namespace phasepos::kernels {

namespace {

void scalar_axpy(double a, const double* x, double* y, std::size_t n) {
    ref::axpy(a, x, y, n);
}
double scalar_dot(const double* a, const double* b, std::size_t n) {
    return ref::dot(a, b, n);
}
void scalar_matvec(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, const double* b, double* y) {
    ref::matvec(w, rows, cols, x, b, y);
}
void scalar_gemm_nt(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t n, std::size_t k) {
    ref::gemm_nt(a, b, c, m, n, k);
}
void scalar_gemm_nn_acc(const double* a, const double* b, double* c, std::size_t m,
                        std::size_t n, std::size_t k) {
    ref::gemm_nn_acc(a, b, c, m, n, k);
}
void scalar_gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m,
                        std::size_t n, std::size_t k) {
    ref::gemm_tn_acc(a, b, c, m, n, k);
}
void scalar_add_row(double* x, std::size_t nrows, std::size_t ncols, const double* v) {
    ref::add_row(x, nrows, ncols, v);
}
void scalar_relu(double* x, std::size_t n) { ref::relu(x, n); }
void scalar_relu_backward(const double* y, double* g, std::size_t n) {
    ref::relu_backward(y, g, n);
}
double scalar_sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return ref::sum_sq_diff(a, b, n);
}

void scalar_adam_update(double* w, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double c1, double c2) {
    const double om1 = 1.0 - beta1;
    const double om2 = 1.0 - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + om1 * g[i];
        v[i] = beta2 * v[i] + om2 * (g[i] * g[i]);
        double mhat = m[i] * c1;
        double vhat = v[i] * c2;
        w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

constexpr Vtable kScalarVtable = {
    scalar_dot,         scalar_axpy, scalar_matvec,        scalar_gemm_nt,
    scalar_gemm_nn_acc, scalar_gemm_tn_acc, scalar_add_row, scalar_relu,
    scalar_relu_backward, scalar_sum_sq_diff, scalar_adam_update,
};

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// defined in kernels_avx2.cpp, compiled with -mavx2 -mfma
extern const Vtable vtable;
bool supported();
}  // namespace avx2
#endif

namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return avx2::supported();
#else
    return false;
#endif
}

const Vtable* table_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2) return &avx2::vtable;
#endif
    (void)b;
    return &kScalarVtable;
}

Backend detect_backend() {
    if (const char* env = std::getenv("PHASEPOS_KERNELS")) {
        std::string s = env;
        if (s == "scalar") return Backend::scalar;
        if (s == "avx2") {
            if (!avx2_supported())
                throw std::runtime_error("PHASEPOS_KERNELS=avx2: not supported on this CPU");
            return Backend::avx2;
        }
        throw std::runtime_error("PHASEPOS_KERNELS: unknown backend '" + s + "'");
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = detect_backend();
const Vtable* g_vtable = table_for(g_backend);

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

bool backend_available(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && avx2_supported());
}

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error(std::string("kernel backend unavailable: ") +
                                 backend_name(b));
    g_backend = b;
    g_vtable = table_for(b);
}

double dot(const double* a, const double* b, std::size_t n) {
    return g_vtable->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    g_vtable->axpy(alpha, x, y, n);
}
void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
            const double* b, double* y) {
    g_vtable->matvec(w, rows, cols, x, b, y);
}
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
    g_vtable->gemm_nt(a, b, c, m, n, k);
}
void gemm_nn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k) {
    g_vtable->gemm_nn_acc(a, b, c, m, n, k);
}
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t n, std::size_t k) {
    g_vtable->gemm_tn_acc(a, b, c, m, n, k);
}
void add_row(double* x, std::size_t nrows, std::size_t ncols, const double* v) {
    g_vtable->add_row(x, nrows, ncols, v);
}
void relu(double* x, std::size_t n) { g_vtable->relu(x, n); }
void relu_backward(const double* y, double* g, std::size_t n) {
    g_vtable->relu_backward(y, g, n);
}
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return g_vtable->sum_sq_diff(a, b, n);
}
void adam_update(double* w, double* m, double* v, const double* g, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double c1,
                 double c2) {
    g_vtable->adam_update(w, m, v, g, n, lr, beta1, beta2, eps, c1, c2);
}

}  // namespace phasepos::kernels
