#pragma once

// Test-only reference integrator: classic fixed-step RK4 at h = 1e-4 h with
// event refinement by bisection on the step fraction. Deliberately separate
// from the library's embedded RK45 so the two can check each other.

#include <cmath>
#include <functional>

#include "difc/model.hpp"

namespace oracle {

struct State {
    double c1, c2, t;
};

inline State rk4_step(const State& x, double u, const difc::GammaParams& g,
                      const difc::PlantConfig& cfg, double h) {
    auto f = [&](double c1, double c2) {
        const auto d = difc::rhs({c1, c2, 0.0}, u, g, cfg);
        return std::pair{d.dc1, d.dc2};
    };
    const auto [k1a, k1b] = f(x.c1, x.c2);
    const auto [k2a, k2b] = f(x.c1 + 0.5 * h * k1a, x.c2 + 0.5 * h * k1b);
    const auto [k3a, k3b] = f(x.c1 + 0.5 * h * k2a, x.c2 + 0.5 * h * k2b);
    const auto [k4a, k4b] = f(x.c1 + h * k3a, x.c2 + h * k3b);
    return {x.c1 + h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a),
            x.c2 + h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b), x.t + h};
}

using EventFn = std::function<double(const State&)>;

struct ArcEnd {
    State state;
    bool hit = false;
};

// integrate with fixed h until the event changes sign, then bisect the final
// partial step; falls off at t_cap without an event
inline ArcEnd integrate_to_event(State x, double u, const difc::GammaParams& g,
                                 const difc::PlantConfig& cfg, const EventFn& ev,
                                 double h = 1e-4, double t_cap = 100.0) {
    double g_prev = ev(x);
    const double t_end = x.t + t_cap;
    while (x.t < t_end) {
        const State xn = rk4_step(x, u, g, cfg, h);
        const double g_new = ev(xn);
        if ((g_prev > 0.0 && g_new <= 0.0) || (g_prev < 0.0 && g_new >= 0.0)) {
            double lo = 0.0, hi = h;
            while (hi - lo > 1e-13) {
                const double mid = 0.5 * (lo + hi);
                const State xm = rk4_step(x, u, g, cfg, mid);
                if ((g_prev > 0.0) ? (ev(xm) > 0.0) : (ev(xm) < 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            return {rk4_step(x, u, g, cfg, 0.5 * (lo + hi)), true};
        }
        x = xn;
        g_prev = g_new;
    }
    return {x, false};
}

inline State integrate_for(State x, double u, const difc::GammaParams& g,
                           const difc::PlantConfig& cfg, double T, double h = 1e-4) {
    const double t_end = x.t + T;
    while (x.t + h <= t_end) x = rk4_step(x, u, g, cfg, h);
    if (x.t < t_end) x = rk4_step(x, u, g, cfg, t_end - x.t);
    return x;
}

struct NominalTimes {
    double t1, t2;
    State at_switch, at_ratio;
};

// reference nominal solve: u=0 to S=0, singular to the target ratio
inline NominalTimes solve_reference(const difc::GammaParams& g,
                                    const difc::PlantConfig& cfg, double h = 1e-4) {
    const State x0{cfg.c1_0, cfg.c2_0, 0.0};
    auto sw = [&](const State& s) {
        return difc::switching_value({s.c1, s.c2, s.t}, g);
    };
    const auto a1 = integrate_to_event(x0, 0.0, g, cfg, sw, h);
    const double us = difc::singular_control(g);
    const double ratio = cfg.target_ratio();
    auto rt = [&](const State& s) { return ratio - s.c1 / s.c2; };
    const auto a2 = integrate_to_event(a1.state, us, g, cfg, rt, h);
    return {a1.state.t, a2.state.t, a1.state, a2.state};
}

}  // namespace oracle
