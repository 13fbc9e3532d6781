#include "difc/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace difc {
namespace {

struct Vec2 {
    double a{}, b{};
    Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
    Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
    Vec2 operator*(double s) const { return {a * s, b * s}; }
};

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192,
                 A75 = -2187.0 / 6784, A76 = 11.0 / 84;
// error = y5 - y4
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
// dense-output weights (Hairer's dopri5 continuous extension)
constexpr double D1 = -12715105075.0 / 11282082432.0;
constexpr double D3 = 87487479700.0 / 32700410799.0;
constexpr double D4 = -10690763975.0 / 1880347072.0;
constexpr double D5 = 701980252875.0 / 199316789632.0;
constexpr double D6 = -1453857185.0 / 822651844.0;
constexpr double D7 = 69997945.0 / 29380423.0;

struct DenseSeg {
    double t0{}, h{};
    Vec2 r1, r2, r3, r4, r5;

    Vec2 eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + (r2 + (r3 + (r4 + r5 * th1) * th) * th1) * th;
    }
};

struct Stepper {
    const PlantConfig& cfg;
    GammaParams g;
    double u;

    Vec2 f(const Vec2& y) const {
        const ProcessState x{y.a, y.b, 0.0};
        const auto d = rhs(x, u, g, cfg);
        return {d.dc1, d.dc2};
    }

    // One DOPRI5 step with FSAL; fills the dense segment.
    // Returns the embedded error estimate scaled by tolerances.
    double step(double t, const Vec2& y, const Vec2& k1, double h, Vec2& y_out,
                Vec2& k_last, DenseSeg& seg, const IntegrateOptions& opt) const {
        const Vec2 k2 = f(y + k1 * (A21 * h));
        const Vec2 k3 = f(y + (k1 * A31 + k2 * A32) * h);
        const Vec2 k4 = f(y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
        const Vec2 k5 = f(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
        const Vec2 k6 = f(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
        y_out = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        const Vec2 k7 = f(y_out);
        k_last = k7;

        const Vec2 err =
            (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        double nrm = 0.0;
        const double sc1 = opt.atol + opt.rtol * std::max(std::abs(y.a), std::abs(y_out.a));
        const double sc2 = opt.atol + opt.rtol * std::max(std::abs(y.b), std::abs(y_out.b));
        nrm = std::sqrt(0.5 * ((err.a / sc1) * (err.a / sc1) + (err.b / sc2) * (err.b / sc2)));

        const Vec2 ydiff = y_out - y;
        const Vec2 bspl = k1 * h - ydiff;
        seg.t0 = t;
        seg.h = h;
        seg.r1 = y;
        seg.r2 = ydiff;
        seg.r3 = bspl;
        seg.r4 = ydiff - k7 * h - bspl;
        seg.r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
        return nrm;
    }
};

}  // namespace

ArcResult integrate_arc(const ProcessState& x0, double u, const GammaParams& g,
                        const PlantConfig& cfg, const StopCondition& stop,
                        const IntegrateOptions& opt) {
    ArcResult res;
    res.state = x0;

    const bool timed = stop.kind == StopCondition::Kind::Duration;
    const double t_end = timed ? x0.t + stop.duration : x0.t + opt.t_cap;

    EventFn ev;
    int dir = 0;
    if (stop.kind == StopCondition::Kind::Event) {
        ev = stop.event;
        dir = stop.direction;
    } else if (stop.kind == StopCondition::Kind::TargetRatio) {
        const double r = stop.ratio;
        ev = [r](const ProcessState& x) { return x.c1 / x.c2 - r; };
        dir = +1;
    }

    auto record_point = [&](double t, const Vec2& y) {
        const ProcessState x{y.a, y.b, t};
        res.traj.push_back({t, y.a, y.b, u, permeate_flux(x, g)});
    };

    Stepper st{cfg, g, u};
    double t = x0.t;
    Vec2 y{x0.c1, x0.c2};
    if (timed && stop.duration <= 0.0) {  // zero-duration arc
        if (opt.record) record_point(t, y);
        return res;
    }

    double g_prev = ev ? ev(x0) : 0.0;
    Vec2 k1 = st.f(y);

    double h = opt.h_init;
    if (h <= 0.0) {
        const double d = std::max(std::abs(k1.a), std::abs(k1.b));
        h = std::clamp(0.01 * std::max(std::abs(y.a), std::abs(y.b)) / std::max(d, 1e-12),
                       1e-8, opt.h_max);
    }
    h = std::min(h, opt.h_max);

    double next_sample = x0.t;  // trajectory grid
    if (opt.record) {
        record_point(t, y);
        next_sample = x0.t + cfg.meas_period;
    }

    const double h_min_floor = 1e-14;
    int rejects_in_row = 0;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        Vec2 y_new, k_new;
        DenseSeg seg;
        const double err = st.step(t, y, k1, h, y_new, k_new, seg, opt);
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < h_min_floor * std::max(1.0, std::abs(t)) || ++rejects_in_row > 60)
                throw StepFailure("integrate_arc: step size underflow");
            continue;
        }
        rejects_in_row = 0;
        const double t_new = t + h;
        res.h_last = h;

        double t_stop = t_new;
        bool hit = false;
        if (ev) {
            const double g_new = ev({y_new.a, y_new.b, t_new});
            const bool crossing = (g_prev > 0.0 && g_new <= 0.0 && dir <= 0) ||
                                  (g_prev < 0.0 && g_new >= 0.0 && dir >= 0);
            if (crossing) {
                double lo = t, hi = t_new;
                while (hi - lo > opt.event_time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    const Vec2 ym = seg.eval(mid);
                    const double gm = ev({ym.a, ym.b, mid});
                    if ((g_prev > 0.0) ? (gm > 0.0) : (gm < 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                t_stop = 0.5 * (lo + hi);
                hit = true;
            }
            g_prev = g_new;
        }

        if (opt.record) {
            while (next_sample <= t_stop + 1e-15) {
                const Vec2 ys = seg.eval(next_sample);
                record_point(next_sample, ys);
                next_sample += cfg.meas_period;
            }
        }

        if (hit) {
            const Vec2 ye = seg.eval(t_stop);
            res.state = {ye.a, ye.b, t_stop};
            res.event_hit = true;
            if (opt.record && (res.traj.empty() || res.traj.back().t < t_stop - 1e-15))
                record_point(t_stop, ye);
            return res;
        }

        t = t_new;
        y = y_new;
        k1 = k_new;  // FSAL
        const double fac = (err > 1e-30) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = std::min(h * std::clamp(fac, 0.2, 5.0), opt.h_max);
    }

    if (!timed && !opt.cap_is_stop)
        throw EventNotBracketed("integrate_arc: stop event not reached within time cap");
    res.state = {y.a, y.b, t_end};
    if (opt.record && (res.traj.empty() || res.traj.back().t < t_end - 1e-15))
        record_point(t_end, y);
    return res;
}

}  // namespace difc
