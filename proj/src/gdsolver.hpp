#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "scenario.hpp"

namespace phasepos::gd {

using scenario::Vec2;

struct GdConfig {
    std::size_t iterations = 500;  // T
    double learning_rate = 0.08;   // alpha
    int restarts = 4;              // extra starts at the area quadrant centers
    double area_side = 10.0;       // locates the quadrant centers
};

struct PositionEstimate {
    Vec2 position;
    double cost = 0.0;
    std::size_t iterations_used = 0;
    bool collinear_warning = false;
    bool failed = false;  // every start diverged
};

/// One steepest-descent step on the squared hyperbola residuals
///   L(x) = sum_j (||x - ap_j|| - ||x - ap_0|| - dhat_j)^2.
/// Templated on the scalar so the FLOP instrumentation can run the exact
/// production arithmetic. Returns the cost at the pre-update point.
/// alpha2 = 2 * learning_rate (the gradient's factor 2 is folded in).
template <class T>
T gd_step(T& px, T& py, const std::vector<Vec2>& aps, const std::vector<int>& j_set,
          int reference, const std::vector<double>& dhat, double alpha2) {
    using std::sqrt;
    const Vec2& ref = aps[reference];
    T dx0 = px - T(ref.x);
    T dy0 = py - T(ref.y);
    T d0 = sqrt(dx0 * dx0 + dy0 * dy0);
    if (!(d0 > T(0.0))) {  // iterate on top of an AP: nudge and retry
        px = px + T(1e-9);
        py = py + T(1e-9);
        return gd_step(px, py, aps, j_set, reference, dhat, alpha2);
    }
    T u0x = dx0 / d0;
    T u0y = dy0 / d0;
    T cost(0.0), gx(0.0), gy(0.0);
    for (std::size_t k = 0; k < j_set.size(); ++k) {
        const Vec2& ap = aps[j_set[k]];
        T dxj = px - T(ap.x);
        T dyj = py - T(ap.y);
        T dj = sqrt(dxj * dxj + dyj * dyj);
        if (!(dj > T(0.0))) {
            px = px + T(1e-9);
            py = py + T(1e-9);
            return gd_step(px, py, aps, j_set, reference, dhat, alpha2);
        }
        T ujx = dxj / dj;
        T ujy = dyj / dj;
        T r = dj - d0 - T(dhat[k]);
        cost = cost + r * r;
        gx = gx + r * (ujx - u0x);
        gy = gy + r * (ujy - u0y);
    }
    px = px - T(alpha2) * gx;
    py = py - T(alpha2) * gy;
    return cost;
}

/// Cost and analytic gradient at x. Throws std::domain_error when x
/// coincides with a participating AP.
std::pair<double, Vec2> cost_and_gradient(Vec2 x, const std::vector<Vec2>& aps,
                                          const std::vector<int>& j_set, int reference,
                                          const std::vector<double>& dhat);

/// Full solve: runs exactly cfg.iterations steps from the centroid of the
/// participating APs plus cfg.restarts quadrant starts, and returns the
/// lowest-cost iterate seen. j_set holds AP indices (reference excluded),
/// dhat the matching differential distance estimates.
PositionEstimate solve(const GdConfig& cfg, const std::vector<Vec2>& aps,
                       int reference, const std::vector<int>& j_set,
                       const std::vector<double>& dhat);

}  // namespace phasepos::gd
