#include "gdsolver.hpp"

#include <cmath>
#include <limits>

namespace phasepos::gd {

namespace {

double cost_at(Vec2 x, const std::vector<Vec2>& aps, const std::vector<int>& j_set,
               int reference, const std::vector<double>& dhat) {
    double d0 = scenario::distance(x, aps[reference]);
    double cost = 0.0;
    for (std::size_t k = 0; k < j_set.size(); ++k) {
        double r = scenario::distance(x, aps[j_set[k]]) - d0 - dhat[k];
        cost += r * r;
    }
    return cost;
}

void check_args(const std::vector<Vec2>& aps, int reference,
                const std::vector<int>& j_set, const std::vector<double>& dhat) {
    if (j_set.size() < 2)
        throw std::invalid_argument("gdsolver: need at least two differential pairs");
    if (dhat.size() != j_set.size())
        throw std::invalid_argument("gdsolver: j_set / dhat length mismatch");
    if (reference < 0 || static_cast<std::size_t>(reference) >= aps.size())
        throw std::invalid_argument("gdsolver: reference index out of range");
    for (int j : j_set)
        if (j < 0 || static_cast<std::size_t>(j) >= aps.size() || j == reference)
            throw std::invalid_argument("gdsolver: bad AP index in j_set");
}

bool all_collinear(const std::vector<Vec2>& aps, int reference,
                   const std::vector<int>& j_set) {
    const Vec2& a = aps[reference];
    double max_cross = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < j_set.size(); ++i) {
        Vec2 u{aps[j_set[i]].x - a.x, aps[j_set[i]].y - a.y};
        scale = std::max(scale, std::hypot(u.x, u.y));
        for (std::size_t k = i + 1; k < j_set.size(); ++k) {
            Vec2 v{aps[j_set[k]].x - a.x, aps[j_set[k]].y - a.y};
            max_cross = std::max(max_cross, std::abs(u.x * v.y - u.y * v.x));
        }
    }
    return max_cross <= 1e-9 * scale * scale;
}

}  // namespace

std::pair<double, Vec2> cost_and_gradient(Vec2 x, const std::vector<Vec2>& aps,
                                          const std::vector<int>& j_set, int reference,
                                          const std::vector<double>& dhat) {
    check_args(aps, reference, j_set, dhat);
    double d0 = scenario::distance(x, aps[reference]);
    if (d0 == 0.0) throw std::domain_error("cost_and_gradient: x coincides with an AP");
    Vec2 u0{(x.x - aps[reference].x) / d0, (x.y - aps[reference].y) / d0};
    double cost = 0.0;
    Vec2 grad{0.0, 0.0};
    for (std::size_t k = 0; k < j_set.size(); ++k) {
        const Vec2& ap = aps[j_set[k]];
        double dj = scenario::distance(x, ap);
        if (dj == 0.0)
            throw std::domain_error("cost_and_gradient: x coincides with an AP");
        Vec2 uj{(x.x - ap.x) / dj, (x.y - ap.y) / dj};
        double r = dj - d0 - dhat[k];
        cost += r * r;
        grad.x += 2.0 * r * (uj.x - u0.x);
        grad.y += 2.0 * r * (uj.y - u0.y);
    }
    return {cost, grad};
}

PositionEstimate solve(const GdConfig& cfg, const std::vector<Vec2>& aps,
                       int reference, const std::vector<int>& j_set,
                       const std::vector<double>& dhat) {
    check_args(aps, reference, j_set, dhat);
    if (cfg.iterations < 1)
        throw std::invalid_argument("gdsolver: iterations must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("gdsolver: learning rate must be > 0");
    if (cfg.restarts < 0 || cfg.restarts > 4)
        throw std::invalid_argument("gdsolver: restarts must be in 0..4");

    PositionEstimate est;
    est.collinear_warning = all_collinear(aps, reference, j_set);

    std::vector<Vec2> starts;
    Vec2 centroid{aps[reference].x, aps[reference].y};
    for (int j : j_set) {
        centroid.x += aps[j].x;
        centroid.y += aps[j].y;
    }
    centroid.x /= static_cast<double>(j_set.size() + 1);
    centroid.y /= static_cast<double>(j_set.size() + 1);
    starts.push_back(centroid);
    const double s = cfg.area_side;
    const Vec2 quadrants[4] = {
        {0.25 * s, 0.25 * s}, {0.75 * s, 0.25 * s},
        {0.25 * s, 0.75 * s}, {0.75 * s, 0.75 * s}};
    for (int r = 0; r < cfg.restarts; ++r) starts.push_back(quadrants[r]);

    const double alpha2 = 2.0 * cfg.learning_rate;
    double best_cost = std::numeric_limits<double>::infinity();
    Vec2 best_pos = starts[0];
    bool any_finite = false;

    for (const Vec2& start : starts) {
        double px = start.x, py = start.y;
        double run_best_cost = std::numeric_limits<double>::infinity();
        Vec2 run_best{px, py};
        bool diverged = false;
        for (std::size_t t = 0; t < cfg.iterations; ++t) {
            Vec2 before{px, py};
            double cost = gd_step(px, py, aps, j_set, reference, dhat, alpha2);
            est.iterations_used++;
            if (!std::isfinite(cost) || !std::isfinite(px) || !std::isfinite(py)) {
                diverged = true;
                break;
            }
            if (cost < run_best_cost) {
                run_best_cost = cost;
                run_best = before;
            }
        }
        if (!diverged) {
            double final_cost = cost_at({px, py}, aps, j_set, reference, dhat);
            if (std::isfinite(final_cost) && final_cost < run_best_cost) {
                run_best_cost = final_cost;
                run_best = {px, py};
            }
        }
        if (std::isfinite(run_best_cost)) {
            any_finite = true;
            if (run_best_cost < best_cost) {
                best_cost = run_best_cost;
                best_pos = run_best;
            }
        }
    }
    est.position = best_pos;
    est.cost = best_cost;
    est.failed = !any_finite;
    return est;
}

}  // namespace phasepos::gd
