#include "difc/project.hpp"

#include <algorithm>

namespace difc::project {
namespace {

struct Times {
    double t1, t2;
};

Times corner_times(const GammaParams& g, const ProcessState& x, const PlantConfig& cfg,
                   const IntegrateOptions& opt) {
    const double ratio = cfg.target_ratio();
    if (x.c1 / x.c2 >= ratio) return {x.t, x.t};
    if (switching_value(x, g) > 0.0) {
        auto sol = solve_nominal(g, cfg, x, false, opt);
        return {sol.policy.t1, sol.policy.t2};
    }
    // already on (or past) this corner's singular surface
    auto arc = integrate_arc(x, singular_control(g), g, cfg,
                             StopCondition::for_ratio(ratio), opt);
    return {x.t, arc.state.t};
}

}  // namespace

SwitchIntervals project_switch_times(const estim::GammaBox& box, const ProcessState& state,
                                     const PlantConfig& cfg, const IntegrateOptions& opt) {
    SwitchIntervals out;
    bool first = true;
    for (int i = 0; i < 9; ++i) {
        GammaParams g;
        if (i == 8) {
            g = {box.g1.mid(), box.g2.mid(), box.g3.mid()};
        } else {
            g.gamma1 = (i & 1) ? box.g1.hi : box.g1.lo;
            g.gamma2 = (i & 2) ? box.g2.hi : box.g2.lo;
            g.gamma3 = (i & 4) ? box.g3.hi : box.g3.lo;
        }
        const Times ts = corner_times(g, state, cfg, opt);
        if (first) {
            out.t1 = {ts.t1, ts.t1};
            out.t2 = {ts.t2, ts.t2};
            first = false;
        } else {
            out.t1.lo = std::min(out.t1.lo, ts.t1);
            out.t1.hi = std::max(out.t1.hi, ts.t1);
            out.t2.lo = std::min(out.t2.lo, ts.t2);
            out.t2.hi = std::max(out.t2.hi, ts.t2);
        }
    }
    out.tf = out.t2;  // terminal dilution is an impulse
    out.u_s = project_us(box);
    return out;
}

}  // namespace difc::project
