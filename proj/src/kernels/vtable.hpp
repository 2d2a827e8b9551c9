#pragma once

#include <cstddef>

// Internal dispatch table shared by the backend translation units.

namespace phasepos::kernels {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*,
                   const double*, double*);
    void (*gemm_nt)(const double*, const double*, double*, std::size_t, std::size_t,
                    std::size_t);
    void (*gemm_nn_acc)(const double*, const double*, double*, std::size_t,
                        std::size_t, std::size_t);
    void (*gemm_tn_acc)(const double*, const double*, double*, std::size_t,
                        std::size_t, std::size_t);
    void (*add_row)(double*, std::size_t, std::size_t, const double*);
    void (*relu)(double*, std::size_t);
    void (*relu_backward)(const double*, double*, std::size_t);
    double (*sum_sq_diff)(const double*, const double*, std::size_t);
    void (*adam_update)(double*, double*, double*, const double*, std::size_t, double,
                        double, double, double, double, double);
};

}  // namespace phasepos::kernels
