#pragma once

#include <cstdint>
#include <vector>

#include "difc/policy.hpp"
#include "difc/project.hpp"
#include "difc/setmem.hpp"

// Closed-loop controllers over the sampled plant: certainty-equivalent
// nominal, adaptive robust (midpoint re-solve or variance-minimizing), and
// the dual multi-stage controller that frees its first input(s) and prices
// predicted information gain through scenario costs. The real-time loop
// follows the shrinking-horizon scheme: re-solve only while the projected
// switching-time interval is wider than the tolerance eps.

namespace difc::control {

struct ControlError : ModelError {
    using ModelError::ModelError;
};
struct TreeTooLarge : ControlError {
    using ControlError::ControlError;
};

enum class ControllerKind { Nominal, Adaptive, Dual };
enum class AdaptiveMode { CertaintyEquivalent, VarianceMin };
enum class Branching { Joint3, Full3m };
// Reference cost inside the dual objective: the mid scenario of the same
// assignment, or the certainty-equivalent assignment's mid scenario.
enum class DualReference { MidScenario, CeNominal };

struct ControllerConfig {
    ControllerKind kind = ControllerKind::Adaptive;
    int robust_horizon = 1;                 // Nr
    double eps = 0.1;                       // h, re-solve tolerance
    AdaptiveMode adaptive_mode = AdaptiveMode::CertaintyEquivalent;
    std::vector<double> candidate_inputs{0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
    Branching branching = Branching::Joint3;
    DualReference dual_reference = DualReference::MidScenario;

    void validate() const;
};

// Closed-loop estimation state: the measurement polytope plus nested interval
// hulls in both parameter spaces. The reported gamma box is intersected with
// the prior gamma box (both are valid enclosures of the truth).
class Estimator {
  public:
    Estimator(const estim::GammaPrior& prior, double sigma, std::size_t prune_limit = 512);

    void update(const std::vector<estim::Measurement>& ms);

    const estim::ParamPolytope& polytope() const { return poly_; }
    const estim::ParamBox& p_box() const { return pbox_; }
    const estim::GammaBox& gamma_box() const { return gbox_; }
    const estim::GammaBox& gamma_mirror() const { return gmirror_; }
    GammaParams gamma_mid() const {
        return {gbox_.g1.mid(), gbox_.g2.mid(), gbox_.g3.mid()};
    }
    const estim::GammaPrior& prior() const { return prior_; }

  private:
    estim::GammaPrior prior_;
    double sigma_;
    estim::ParamPolytope poly_;
    estim::ParamBox pbox_;
    estim::GammaBox gmirror_;  // raw fractional bounds, nested over time
    estim::GammaBox gbox_;     // mirror clipped to the gamma prior
};

struct ScenarioNode {
    int stage = 0;
    int parent = -1;
    GammaParams realization;       // drives the plant in this subtree
    ProcessState state;            // predicted state at node entry
    estim::ParamBox box;           // predicted parameter box at node entry
    double input = 0.0;            // applied stage input (shared per group)
    double leaf_cost = 0.0;        // batch time, leaves only
    bool ratio_hit = false;
};

struct ScenarioTree {
    std::vector<ScenarioNode> nodes;
    int robust_horizon = 1;
    int branch_count = 3;
    std::size_t scenario_count = 0;
    double objective = 0.0;
    double chosen_input = 0.0;
};

// Simulate one sampling interval under (u, realization) and fold the
// worst-case-inflated predicted measurements into a copy of the polytope.
struct PredictedUpdate {
    estim::ParamPolytope poly;
    estim::ParamBox box;
    ProcessState state;
    double elapsed = 0.0;
    bool ratio_hit = false;
};
PredictedUpdate predicted_update(const estim::ParamPolytope& poly, const ProcessState& x,
                                 double u, const GammaParams& realization,
                                 const PlantConfig& cfg);

// Branch realizations drawn from the polytope itself (extreme feasible
// points plus a projected midpoint) so predicted updates stay consistent.
std::vector<GammaParams> branch_realizations(const estim::ParamPolytope& poly,
                                             const estim::ParamBox& box, Branching mode);

// Scenario-tree skeleton for the current box; stage >= 1 content is filled
// in during dual_step since it depends on the chosen inputs.
ScenarioTree build_tree(const ProcessState& x, const estim::ParamPolytope& poly,
                        const estim::ParamBox& box, int robust_horizon, Branching mode);

struct DualDecision {
    double u = 0.0;
    double objective = 0.0;
    bool probe = false;  // chosen input differs from the certainty-equivalent one
    ScenarioTree tree;
};

DualDecision dual_step(const ProcessState& x, const Estimator& est,
                       const ControllerConfig& ctrl, const PlantConfig& cfg);

// Inputs the per-sample controllers would apply right now.
double nominal_input(const ProcessState& x, const GammaParams& nominal_params);
double adaptive_input_ce(const ProcessState& x, const GammaParams& mid);

struct VarminDecision {
    bool switch_now = false;
    double u_s = 0.0;
    double objective = 0.0;
};
VarminDecision adaptive_step_varmin(const ProcessState& x, const estim::GammaBox& box,
                                    const PlantConfig& cfg);

// ---- real-time loop ------------------------------------------------------

struct InputSegment {
    double t = 0.0;
    double u = 0.0;
};

struct BoundsSample {
    double t = 0.0;
    estim::ParamBox p;
    estim::GammaBox g;
};

struct IntervalSample {
    double t = 0.0;
    project::SwitchIntervals iv;
};

struct BatchResult {
    bool ok = false;
    double tf = 0.0;
    double dilution_factor = 1.0;
    ProcessState terminal;
    double resid_c1 = 0.0;  // |c1(tf) - c1_f|
    double resid_c2 = 0.0;  // |c2(tf) - c2_f|
    std::vector<InputSegment> inputs;
    Trajectory states;                  // meas-grid states incl. event points
    std::vector<BoundsSample> bounds;
    std::vector<IntervalSample> intervals;
    std::vector<double> solve_seconds;  // one entry per controller re-solve
    int resolves = 0;
    int skips = 0;          // decision points gated off by eps
    int probe_samples = 0;  // dual samples with a non-CE input
    std::string error;
};

// Supplies the bounded measurement noise; one stream per run.
class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, double sigma);
    double next();

  private:
    std::uint64_t s_;
    double sigma_;
};

BatchResult run_algorithm1(const GammaParams& p_true, const PlantConfig& cfg,
                           const ControllerConfig& ctrl, const estim::GammaPrior& prior,
                           NoiseStream& noise);

}  // namespace difc::control
