#include "difc/policy.hpp"

#include <cmath>

namespace difc {

double singular_control_numeric(const StateFn& S, const ProcessState& x,
                                const GammaParams& g, const PlantConfig& cfg) {
    const double h1 = 1e-6 * std::abs(x.c1);
    const double h2 = 1e-6 * std::abs(x.c2);
    const double dS_dc1 =
        (S({x.c1 + h1, x.c2, x.t}, g) - S({x.c1 - h1, x.c2, x.t}, g)) / (2.0 * h1);
    const double dS_dc2 =
        (S({x.c1, x.c2 + h2, x.t}, g) - S({x.c1, x.c2 - h2, x.t}, g)) / (2.0 * h2);

    // f = f0 + fu u  with  f0 = rhs(u=0), fu = rhs(u=1) - rhs(u=0)
    const auto d0 = rhs(x, 0.0, g, cfg);
    const auto d1 = rhs(x, 1.0, g, cfg);
    const double num = dS_dc1 * d0.dc1 + dS_dc2 * d0.dc2;
    const double den = dS_dc1 * (d1.dc1 - d0.dc1) + dS_dc2 * (d1.dc2 - d0.dc2);
    if (std::abs(den) < 1e-12 * std::max(1.0, std::abs(num)))
        throw SingularDenominator("singular_control_numeric: grad(S).f_u vanishes");
    return -num / den;
}

NominalSolution solve_nominal(const GammaParams& g, const PlantConfig& cfg,
                              const ProcessState& x0, bool record,
                              const IntegrateOptions& opt) {
    NominalSolution sol;
    sol.policy.params = g;
    sol.policy.u_s = singular_control(g);

    const double ratio = cfg.target_ratio();
    if (x0.c1 / x0.c2 >= ratio) {  // already at (or past) the ratio: dilute only
        sol.policy.t1 = sol.policy.t2 = sol.policy.tf = x0.t;
        sol.at_switch = sol.at_ratio = x0;
        const double factor = x0.c1 / cfg.c1_f;
        sol.policy.dilution_factor = std::max(factor, 1.0);
        sol.terminal = factor >= 1.0 ? apply_dilution(x0, factor) : x0;
        return sol;
    }

    IntegrateOptions io = opt;
    io.record = record;

    const double S0 = switching_value(x0, g);
    ProcessState x1 = x0;
    if (S0 > 0.0) {
        auto stop = StopCondition::for_event(
            [&g](const ProcessState& x) { return switching_value(x, g); }, -1);
        auto arc1 = integrate_arc(x0, 0.0, g, cfg, stop, io);
        if (!arc1.event_hit) throw WrongInitialArc("solve_nominal: S never crossed zero");
        x1 = arc1.state;
        if (record) sol.traj = std::move(arc1.traj);
    } else if (S0 < -1e-12 * g.gamma1) {
        throw WrongInitialArc("solve_nominal: S(x0) < 0, arc structure not {0, singular, dilution}");
    }
    sol.policy.t1 = x1.t;
    sol.at_switch = x1;

    auto arc2 = integrate_arc(x1, sol.policy.u_s, g, cfg,
                              StopCondition::for_ratio(ratio), io);
    if (!arc2.event_hit) throw RatioUnreachable("solve_nominal: ratio event not reached");
    sol.policy.t2 = sol.policy.tf = arc2.state.t;
    sol.at_ratio = arc2.state;
    if (record)
        sol.traj.insert(sol.traj.end(), arc2.traj.begin(), arc2.traj.end());

    sol.policy.dilution_factor = arc2.state.c1 / cfg.c1_f;
    sol.terminal = apply_dilution(arc2.state, sol.policy.dilution_factor);
    return sol;
}

double policy_input(double t, const Policy& pi) {
    if (t > pi.tf) throw OutOfHorizon("policy_input: t beyond tf");
    return t < pi.t1 ? 0.0 : pi.u_s;
}

double batch_time(const GammaParams& g_true, const Policy& pi, const PlantConfig& cfg,
                  const ProcessState& x0, const IntegrateOptions& opt) {
    const double ratio = cfg.target_ratio();
    if (x0.c1 / x0.c2 >= ratio) return x0.t;

    ProcessState x = x0;
    IntegrateOptions io = opt;
    if (switching_value(x, pi.params) > 0.0) {
        // the plant may hit the ratio before the policy's switch, e.g. for a
        // badly mis-parameterized policy; stop on whichever falls to zero first
        auto stop = StopCondition::for_event(
            [&pi, ratio](const ProcessState& s) {
                return std::min(switching_value(s, pi.params), ratio - s.c1 / s.c2);
            },
            -1);
        auto arc1 = integrate_arc(x, 0.0, g_true, cfg, stop, io);
        x = arc1.state;
        if (x.c1 / x.c2 >= ratio * (1.0 - 1e-12)) return x.t;
    }
    auto arc2 = integrate_arc(x, pi.u_s, g_true, cfg, StopCondition::for_ratio(ratio), io);
    if (!arc2.event_hit) throw RatioUnreachable("batch_time: ratio event not reached");
    return arc2.state.t;
}

}  // namespace difc
