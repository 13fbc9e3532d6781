#pragma once

#include "difc/policy.hpp"
#include "difc/setmem.hpp"

// Projection of a parameter box onto the policy parameters: intervals for the
// switching times t1, t2, tf and the singular level u_s. Times come from a
// corner-plus-midpoint sweep (cheap, adequate at this box size, and not a
// validated enclosure); u_s is exact by monotonicity.

namespace difc::project {

struct SwitchIntervals {
    estim::Interval t1, t2, tf, u_s;
};

// u_s = 1/(1+g3) is monotone decreasing in g3, so the endpoint map is exact.
inline estim::Interval project_us(const estim::GammaBox& box) {
    return {1.0 / (1.0 + box.g3.hi), 1.0 / (1.0 + box.g3.lo)};
}

// Solve the nominal policy from `state` at the 8 corners and the midpoint of
// `box`; componentwise min/max of the resulting times. States already past a
// corner's switching surface continue on that corner's singular arc.
SwitchIntervals project_switch_times(const estim::GammaBox& box, const ProcessState& state,
                                     const PlantConfig& cfg,
                                     const IntegrateOptions& opt = {});

}  // namespace difc::project
