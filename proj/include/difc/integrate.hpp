#pragma once

#include <functional>
#include <vector>

#include "difc/model.hpp"

// Embedded Dormand-Prince 5(4) integrator for the two-state plant, with
// dense output and event localization by bisection. The dynamics here are
// smooth and nonstiff; the work is in hitting switching surfaces accurately.

namespace difc {

struct IntegrateError : ModelError {
    using ModelError::ModelError;
};
struct EventNotBracketed : IntegrateError {
    using IntegrateError::IntegrateError;
};
struct StepFailure : IntegrateError {
    using IntegrateError::IntegrateError;
};

// Scalar event function of the state; the integrator stops where it crosses
// zero in the requested direction.
using EventFn = std::function<double(const ProcessState&)>;

struct StopCondition {
    enum class Kind { Duration, Event, TargetRatio } kind = Kind::Duration;
    double duration = 0.0;     // Duration: arc length in h
    EventFn event;             // Event: g(x) = 0, sign-changing
    int direction = 0;         // Event: -1 falling, +1 rising, 0 either
    double ratio = 0.0;        // TargetRatio: stop when c1/c2 reaches this (rising)

    static StopCondition for_duration(double T) {
        StopCondition s;
        s.kind = Kind::Duration;
        s.duration = T;
        return s;
    }
    static StopCondition for_event(EventFn g, int dir = 0) {
        StopCondition s;
        s.kind = Kind::Event;
        s.event = std::move(g);
        s.direction = dir;
        return s;
    }
    static StopCondition for_ratio(double r) {
        StopCondition s;
        s.kind = Kind::TargetRatio;
        s.ratio = r;
        return s;
    }
};

struct TrajectoryPoint {
    double t{};
    double c1{};
    double c2{};
    double u{};
    double qp{};
};

using Trajectory = std::vector<TrajectoryPoint>;

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_max = 0.25;        // h
    double h_init = 0.0;        // 0: choose automatically
    double t_cap = 100.0;       // h of model time an event must occur within
    double event_time_tol = 1e-12;  // h, bisection width on dense output
    bool record = false;        // sample trajectory at cfg.meas_period
    bool cap_is_stop = false;   // event stops: return at t_cap instead of throwing
};

struct ArcResult {
    ProcessState state;   // state satisfying the stop condition
    Trajectory traj;      // only filled when options.record
    bool event_hit = false;
    double h_last = 0.0;  // accepted step size at the end, reusable as h_init
};

// Integrate one constant-u arc from `x0` until `stop` holds.
ArcResult integrate_arc(const ProcessState& x0, double u, const GammaParams& g,
                        const PlantConfig& cfg, const StopCondition& stop,
                        const IntegrateOptions& options = {});

}  // namespace difc
