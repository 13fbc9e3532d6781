#pragma once

#include <array>
#include <optional>
#include <vector>

#include "difc/lp.hpp"
#include "difc/model.hpp"

// Guaranteed parameter estimation under bounded measurement noise. The flux
// law is linear in (p1, p2, p3), so every measurement contributes two
// half-spaces and the feasible set is a polytope that only ever shrinks.
// Interval hulls are exact via LP; gamma-space bounds follow from the p-box
// and two linear-fractional programs solved by bisection on LP feasibility.

namespace difc::estim {

struct EstimError : ModelError {
    using ModelError::ModelError;
};
struct Infeasible : EstimError {
    using EstimError::EstimError;
};
struct Unbounded : EstimError {
    using EstimError::EstimError;
};
struct NoiseOutOfBound : EstimError {
    using EstimError::EstimError;
};

struct Measurement {
    double t{};        // h
    double qp_meas{};  // L/h
    double c1{};       // g/L
    double c2{};       // g/L
};

// Flux measurement corrupted by a bounded draw; |noise_draw| <= sigma.
Measurement simulate_measurement(const GammaParams& p_true, const ProcessState& state,
                                 double noise_draw, double sigma);

struct Interval {
    double lo{}, hi{};
    double mid() const { return 0.5 * (lo + hi); }
    double diam() const { return hi - lo; }
    bool contains(double v, double slack = 0.0) const {
        return v >= lo - slack && v <= hi + slack;
    }
};

struct ParamBox {
    std::array<double, 3> lo{}, hi{};

    Interval axis(int j) const { return {lo[j], hi[j]}; }
    std::array<double, 3> mid() const {
        return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    }
    bool contains(const std::array<double, 3>& p, double slack = 0.0) const {
        for (int j = 0; j < 3; ++j)
            if (p[j] < lo[j] - slack || p[j] > hi[j] + slack) return false;
        return true;
    }
    bool contained_in(const ParamBox& outer, double slack = 0.0) const {
        for (int j = 0; j < 3; ++j)
            if (lo[j] < outer.lo[j] - slack || hi[j] > outer.hi[j] + slack) return false;
        return true;
    }
    ParamBox intersect(const ParamBox& o) const {
        ParamBox r;
        for (int j = 0; j < 3; ++j) {
            r.lo[j] = std::max(lo[j], o.lo[j]);
            r.hi[j] = std::min(hi[j], o.hi[j]);
        }
        return r;
    }
};

struct GammaBox {
    Interval g1, g2, g3;
};

struct GammaPrior {
    GammaParams lo, hi;

    GammaParams mid() const {
        return {0.5 * (lo.gamma1 + hi.gamma1), 0.5 * (lo.gamma2 + hi.gamma2),
                0.5 * (lo.gamma3 + hi.gamma3)};
    }
    // interval hull of the image in p-space; the map is monotone per axis
    ParamBox p_hull() const {
        ParamBox b;
        b.lo = {lo.gamma1 * std::log(lo.gamma2), lo.gamma1, lo.gamma1 * lo.gamma3};
        b.hi = {hi.gamma1 * std::log(hi.gamma2), hi.gamma1, hi.gamma1 * hi.gamma3};
        return b;
    }
};

// Accumulated half-spaces a.p <= b, always including the six prior-box
// faces. Rows are kept normalized. When the row count passes `prune_limit`,
// rows redundant against the current interval hull are dropped.
class ParamPolytope {
  public:
    explicit ParamPolytope(const ParamBox& prior_box, std::size_t prune_limit = 512);

    void add_measurement(const Measurement& m, double sigma);
    void add_halfspace(const std::array<double, 3>& a, double b);

    std::size_t size() const { return prob_.m(); }
    const ParamBox& prior() const { return prior_; }
    const lp::Problem& problem() const { return prob_; }

    // Exact interval hull by six LPs. Throws Infeasible when empty.
    ParamBox bound_p() const;

    // Gamma-space mirror: gamma1 = p2 directly, ln gamma2 = p1/p2 and
    // gamma3 = p3/p2 as fractional bounds bisected on LP feasibility.
    // `warm` optionally supplies outer brackets (a previous result).
    GammaBox bound_gamma(double tol = 1e-9, const GammaBox* warm = nullptr) const;

    // drops rows that are slack on the whole current hull
    void prune(const ParamBox& box);

  private:
    friend struct LpAccess;
    lp::Problem prob_;
    ParamBox prior_;
    std::size_t prune_limit_;
    std::size_t fixed_rows_;  // prior faces, never pruned
};

enum class Sense { Min, Max };

struct LpOutcome {
    double value{};
    std::array<double, 3> arg{};
};

// Exact optimum of a dense 3-variable LP over the polytope.
LpOutcome lp_solve(const std::array<double, 3>& objective, const ParamPolytope& poly,
                   Sense sense);

}  // namespace difc::estim
