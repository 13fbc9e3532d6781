#pragma once

#include <functional>

#include "difc/integrate.hpp"
#include "difc/model.hpp"

// Pontryagin-parameterized optimal control for the diafiltration case study:
// a no-wash arc while the switching function is positive, a singular arc that
// holds it at zero, and a terminal dilution impulse at the concentration-ratio
// target. The policy is fully described by (params, t1, t2, tf, u_s).

namespace difc {

struct PolicyError : ModelError {
    using ModelError::ModelError;
};
struct WrongInitialArc : PolicyError {
    using PolicyError::PolicyError;
};
struct RatioUnreachable : PolicyError {
    using PolicyError::PolicyError;
};
struct OutOfHorizon : PolicyError {
    using PolicyError::PolicyError;
};
struct SingularDenominator : PolicyError {
    using PolicyError::PolicyError;
};

struct Policy {
    GammaParams params;
    double t1{};   // h, saturated -> singular switch
    double t2{};   // h, singular arc end (ratio event)
    double tf{};   // h, equals t2: terminal dilution is an impulse
    double u_s{};  // singular control level
    double dilution_factor = 1.0;  // executed at tf
};

// Switching function S(x, p); positive selects u = 0, zero hosts the
// singular arc.
inline double switching_value(const ProcessState& x, const GammaParams& g) {
    return g.gamma1 * (std::log(g.gamma2) - std::log(x.c1) -
                       g.gamma3 * std::log(x.c2) - g.gamma3 - 1.0);
}

// Closed-form singular level u_s = 1/(1+gamma3).
inline double singular_control(const GammaParams& g) { return 1.0 / (1.0 + g.gamma3); }

// Singular level recovered numerically from dS/dt = 0 with central finite
// differences, -(grad S . f0)/(grad S . fu). A cross-check for the closed
// form, and usable for any scalar state function S.
using StateFn = std::function<double(const ProcessState&, const GammaParams&)>;
double singular_control_numeric(const StateFn& S, const ProcessState& x,
                                const GammaParams& g, const PlantConfig& cfg);

struct NominalSolution {
    Policy policy;
    Trajectory traj;            // sampled at cfg.meas_period when requested
    ProcessState at_switch;     // state at t1
    ProcessState at_ratio;      // state at t2 (pre-dilution)
    ProcessState terminal;      // post-dilution state
};

// Solve the nominal problem from `x0` for fixed parameters: u=0 until S=0,
// u_s until c1/c2 reaches the target ratio, then dilute to the targets.
// Throws WrongInitialArc when S(x0) < 0 (the case study always starts
// positive) and RatioUnreachable when the ratio event cannot be bracketed.
NominalSolution solve_nominal(const GammaParams& g, const PlantConfig& cfg,
                              const ProcessState& x0, bool record = false,
                              const IntegrateOptions& opt = {});

inline NominalSolution solve_nominal(const GammaParams& g, const PlantConfig& cfg,
                                     bool record = false) {
    return solve_nominal(g, cfg, {cfg.c1_0, cfg.c2_0, 0.0}, record);
}

// The open-loop input profile of a solved policy. Closed-left convention at
// t1: u(t1) = u_s. The dilution at tf is an impulse, not a finite input.
double policy_input(double t, const Policy& pi);

// Batch time when the true plant `g_true` is driven by the feedback form of
// policy `pi` (switch where S(x, pi.params) crosses zero, singular level
// pi.u_s, terminal ratio event). Returns the dilution time tf.
double batch_time(const GammaParams& g_true, const Policy& pi, const PlantConfig& cfg,
                  const ProcessState& x0, const IntegrateOptions& opt = {});

inline double batch_time(const GammaParams& g_true, const Policy& pi,
                         const PlantConfig& cfg) {
    return batch_time(g_true, pi, cfg, {cfg.c1_0, cfg.c2_0, 0.0});
}

}  // namespace difc
