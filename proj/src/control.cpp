#include "difc/control.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace difc::control {

void ControllerConfig::validate() const {
    if (robust_horizon < 1) throw ControlError("controller config: Nr >= 1 required");
    if (!(eps > 0.0)) throw ControlError("controller config: eps must be positive");
    for (double u : candidate_inputs)
        if (u < 0.0 || u > 2.0)
            throw ControlError("controller config: candidate inputs must lie in [0, 2]");
    if (kind == ControllerKind::Dual && candidate_inputs.empty())
        throw ControlError("controller config: dual controller needs candidate inputs");
}

// ---- estimator -------------------------------------------------------------

namespace {

estim::GammaBox clip_to_prior(const estim::GammaBox& g, const estim::GammaPrior& prior) {
    estim::GammaBox r = g;
    r.g1.lo = std::max(r.g1.lo, prior.lo.gamma1);
    r.g1.hi = std::min(r.g1.hi, prior.hi.gamma1);
    r.g2.lo = std::max(r.g2.lo, prior.lo.gamma2);
    r.g2.hi = std::min(r.g2.hi, prior.hi.gamma2);
    r.g3.lo = std::max(r.g3.lo, prior.lo.gamma3);
    r.g3.hi = std::min(r.g3.hi, prior.hi.gamma3);
    return r;
}

estim::GammaBox intersect(const estim::GammaBox& a, const estim::GammaBox& b) {
    auto cap = [](const estim::Interval& x, const estim::Interval& y) {
        return estim::Interval{std::max(x.lo, y.lo), std::min(x.hi, y.hi)};
    };
    return {cap(a.g1, b.g1), cap(a.g2, b.g2), cap(a.g3, b.g3)};
}

}  // namespace

Estimator::Estimator(const estim::GammaPrior& prior, double sigma, std::size_t prune_limit)
    : prior_(prior), sigma_(sigma), poly_(prior.p_hull(), prune_limit) {
    pbox_ = prior.p_hull();
    gmirror_ = poly_.bound_gamma();
    gbox_ = clip_to_prior(gmirror_, prior_);
}

void Estimator::update(const std::vector<estim::Measurement>& ms) {
    if (ms.empty()) return;
    for (const auto& m : ms) poly_.add_measurement(m, sigma_);
    pbox_ = poly_.bound_p().intersect(pbox_);  // nesting by construction
    gmirror_ = intersect(poly_.bound_gamma(1e-9, &gmirror_), gmirror_);
    gbox_ = clip_to_prior(gmirror_, prior_);
}

// ---- per-sample inputs -----------------------------------------------------

double nominal_input(const ProcessState& x, const GammaParams& nominal_params) {
    return switching_value(x, nominal_params) > 0.0 ? 0.0
                                                    : singular_control(nominal_params);
}

double adaptive_input_ce(const ProcessState& x, const GammaParams& mid) {
    return nominal_input(x, mid);
}

// ---- variance-minimizing adaptive step -------------------------------------

namespace {

GammaParams box_point(const estim::GammaBox& b, int corner) {
    if (corner == 8) return {b.g1.mid(), b.g2.mid(), b.g3.mid()};
    return {(corner & 1) ? b.g1.hi : b.g1.lo, (corner & 2) ? b.g2.hi : b.g2.lo,
            (corner & 4) ? b.g3.hi : b.g3.lo};
}

// batch time from x when the plant runs g_plant and the controller switches
// on S(x, g_switch) = 0 (unless already switched) and then holds level u_s
double scenario_cost(const ProcessState& x, const GammaParams& g_plant,
                     const GammaParams& g_switch, double u_s, bool switch_now,
                     const PlantConfig& cfg) {
    Policy pi;
    pi.params = g_switch;
    pi.u_s = u_s;
    pi.tf = std::numeric_limits<double>::infinity();
    ProcessState x0 = x;
    if (switch_now) {
        // jump straight to the singular level: emulate by a policy whose
        // switching surface is already crossed
        const double ratio = cfg.target_ratio();
        if (x.c1 / x.c2 >= ratio) return x.t;
        auto arc = integrate_arc(x, u_s, g_plant, cfg, StopCondition::for_ratio(ratio));
        return arc.state.t;
    }
    return batch_time(g_plant, pi, cfg, x0);
}

}  // namespace

VarminDecision adaptive_step_varmin(const ProcessState& x, const estim::GammaBox& box,
                                    const PlantConfig& cfg) {
    const GammaParams mid = box_point(box, 8);
    const double us_cands[3] = {singular_control({0, 0, box.g3.hi}),
                                singular_control(mid),
                                singular_control({0, 0, box.g3.lo})};
    const bool ce_now = switching_value(x, mid) <= 0.0;
    const double ce_us = singular_control(mid);

    VarminDecision best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (bool now : {false, true}) {
        for (double us : us_cands) {
            double jmid = 0.0, obj = 0.0;
            std::array<double, 9> J{};
            for (int c = 0; c < 9; ++c) {
                const GammaParams gp = box_point(box, c);
                J[c] = scenario_cost(x, gp, mid, us, now, cfg);
            }
            jmid = J[8];
            for (int c = 0; c < 8; ++c) obj += (J[c] - jmid) * (J[c] - jmid);
            const bool is_ce = (now == ce_now) && std::abs(us - ce_us) < 1e-12;
            if (obj < best_obj * (1.0 - 1e-12) - 1e-15 ||
                (obj <= best_obj * (1.0 + 1e-12) + 1e-15 && is_ce)) {
                best_obj = obj;
                best = {now, us, obj};
            }
        }
    }
    return best;
}

// ---- predicted update and the scenario tree --------------------------------

PredictedUpdate predicted_update(const estim::ParamPolytope& poly, const ProcessState& x,
                                 double u, const GammaParams& realization,
                                 const PlantConfig& cfg) {
    PredictedUpdate out{poly, {}, x, 0.0, false};
    const double ratio = cfg.target_ratio();
    const int slices = static_cast<int>(std::round(cfg.Ts / cfg.meas_period));
    IntegrateOptions io;
    io.cap_is_stop = false;
    for (int s = 0; s < slices; ++s) {
        if (out.state.c1 / out.state.c2 >= ratio) {
            out.ratio_hit = true;
            break;
        }
        IntegrateOptions slice_opt = io;
        slice_opt.t_cap = cfg.meas_period;
        slice_opt.cap_is_stop = true;
        auto arc = integrate_arc(out.state, u, realization, cfg,
                                 StopCondition::for_ratio(ratio), slice_opt);
        out.elapsed += arc.state.t - out.state.t;
        out.state = arc.state;
        if (arc.event_hit) {
            out.ratio_hit = true;
            break;
        }
        // worst-case +-sigma band around the scenario's own prediction
        const estim::Measurement m{out.state.t, permeate_flux(out.state, realization),
                                   out.state.c1, out.state.c2};
        out.poly.add_measurement(m, cfg.sigma);
    }
    out.box = out.poly.bound_p();
    return out;
}

namespace {

std::array<double, 3> prior_widths(const estim::ParamBox& prior) {
    return {prior.hi[0] - prior.lo[0], prior.hi[1] - prior.lo[1], prior.hi[2] - prior.lo[2]};
}

// L-infinity (prior-width weighted) projection of a box point onto the
// polytope; the feasible point closest to `target`.
std::array<double, 3> project_onto(const estim::ParamPolytope& poly,
                                   const std::array<double, 3>& target,
                                   const std::array<double, 3>& w) {
    lp::Problem prob;
    prob.n = 4;
    const std::size_t m = poly.problem().m();
    for (std::size_t r = 0; r < m; ++r) {
        double row[4] = {poly.problem().rows[r * 3], poly.problem().rows[r * 3 + 1],
                         poly.problem().rows[r * 3 + 2], 0.0};
        prob.add_row(row, poly.problem().rhs[r]);
    }
    for (int j = 0; j < 3; ++j) {
        double row[4] = {0, 0, 0, -w[j]};
        row[j] = 1.0;
        prob.add_row(row, target[j]);  //  p_j - w_j tau <= target_j
        row[j] = -1.0;
        prob.add_row(row, -target[j]);  // -p_j - w_j tau <= -target_j
    }
    // tau >= 0 keeps the problem bounded below
    double pos[4] = {0, 0, 0, -1.0};
    prob.add_row(pos, 0.0);
    const double c[4] = {0, 0, 0, 1.0};
    auto r = lp::minimize(prob, c);
    if (r.status != lp::Status::Optimal)
        throw estim::Infeasible("project_onto: empty polytope");
    return {r.x[0], r.x[1], r.x[2]};
}

std::array<double, 3> extreme_point(const estim::ParamPolytope& poly,
                                    const std::array<double, 3>& w, double sign) {
    const std::array<double, 3> c{sign / w[0], sign / w[1], sign / w[2]};
    return lp_solve(c, poly, estim::Sense::Min).arg;
}

}  // namespace

std::vector<GammaParams> branch_realizations(const estim::ParamPolytope& poly,
                                             const estim::ParamBox& box, Branching mode) {
    const auto w = prior_widths(poly.prior());
    std::vector<GammaParams> out;
    if (mode == Branching::Joint3) {
        const auto lo = extreme_point(poly, w, +1.0);
        const auto mid = project_onto(poly, box.mid(), w);
        const auto hi = extreme_point(poly, w, -1.0);
        for (const auto& p : {lo, mid, hi})
            out.push_back(p_to_gamma({p[0], p[1], p[2]}));
    } else {
        for (int i = 0; i < 27; ++i) {
            std::array<double, 3> target{};
            for (int j = 0, k = i; j < 3; ++j, k /= 3) {
                const int pick = k % 3;
                target[j] = pick == 0 ? box.lo[j] : pick == 1 ? 0.5 * (box.lo[j] + box.hi[j])
                                                              : box.hi[j];
            }
            const auto p = project_onto(poly, target, w);
            out.push_back(p_to_gamma({p[0], p[1], p[2]}));
        }
    }
    return out;
}

ScenarioTree build_tree(const ProcessState& x, const estim::ParamPolytope& poly,
                        const estim::ParamBox& box, int robust_horizon, Branching mode) {
    ScenarioTree tree;
    tree.robust_horizon = robust_horizon;
    tree.branch_count = mode == Branching::Joint3 ? 3 : 27;
    double n_s = 1.0;
    for (int k = 0; k < robust_horizon; ++k) n_s *= tree.branch_count;
    if (n_s > 1e4) throw TreeTooLarge("build_tree: scenario count exceeds 10^4");
    tree.scenario_count = static_cast<std::size_t>(n_s);

    ScenarioNode root;
    root.stage = -1;
    root.state = x;
    root.box = box;
    tree.nodes.push_back(root);
    const auto reals = branch_realizations(poly, box, mode);
    for (const auto& g : reals) {
        ScenarioNode n;
        n.stage = 0;
        n.parent = 0;
        n.realization = g;
        n.state = x;
        n.box = box;
        tree.nodes.push_back(n);
    }
    return tree;
}

// ---- dual step --------------------------------------------------------------

namespace {

GammaParams clip_gamma(const GammaParams& g, const estim::GammaPrior& prior) {
    return {std::clamp(g.gamma1, prior.lo.gamma1, prior.hi.gamma1),
            std::clamp(g.gamma2, prior.lo.gamma2, prior.hi.gamma2),
            std::clamp(g.gamma3, prior.lo.gamma3, prior.hi.gamma3)};
}

// post-horizon continuation: the scenario's plant follows its realization
// while switching decisions come from the mid of its predicted box
double leaf_cost(const PredictedUpdate& up, const GammaParams& realization,
                 const estim::GammaPrior& prior, const PlantConfig& cfg) {
    if (up.ratio_hit) return up.state.t;
    const auto pm = up.box.mid();
    Policy pi;
    pi.params = clip_gamma(p_to_gamma({pm[0], pm[1], pm[2]}), prior);
    pi.u_s = singular_control(pi.params);
    pi.tf = std::numeric_limits<double>::infinity();
    try {
        return batch_time(realization, pi, cfg, up.state);
    } catch (const IntegrateError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

DualDecision dual_step(const ProcessState& x, const Estimator& est,
                       const ControllerConfig& ctrl, const PlantConfig& cfg) {
    const GammaParams mid = est.gamma_mid();
    const double ce_u = adaptive_input_ce(x, mid);

    // candidate set always contains the certainty-equivalent action
    std::vector<double> cands = ctrl.candidate_inputs;
    const bool have_ce =
        std::any_of(cands.begin(), cands.end(),
                    [&](double u) { return std::abs(u - ce_u) < 1e-12; });
    if (!have_ce) cands.push_back(ce_u);

    ScenarioTree tree =
        build_tree(x, est.polytope(), est.p_box(), ctrl.robust_horizon, ctrl.branching);
    const int nb = tree.branch_count;
    const std::size_t nc = cands.size();

    if (ctrl.robust_horizon > 2)
        throw ControlError("dual_step: robust horizon beyond 2 not supported");

    struct Stage0 {
        ProcessState state;                   // post stage-0 state
        estim::ParamBox box;
        bool ratio_hit = false;
        double leaf = 0.0;                    // Nr = 1, or degenerate Nr = 2
        std::vector<GammaParams> child_real;  // Nr = 2
        std::vector<double> child_leaf;       // child x candidate, row-major
    };
    // evaluate every (branch, candidate) pair once
    std::vector<Stage0> eval(nb * nc);
    for (int b = 0; b < nb; ++b) {
        const GammaParams& g_b = tree.nodes[1 + b].realization;
        for (std::size_t c = 0; c < nc; ++c) {
            Stage0& e = eval[b * nc + c];
            auto up = predicted_update(est.polytope(), x, cands[c], g_b, cfg);
            e.state = up.state;
            e.box = up.box;
            e.ratio_hit = up.ratio_hit;
            if (ctrl.robust_horizon == 1) {
                e.leaf = leaf_cost(up, g_b, est.prior(), cfg);
            } else {
                if (up.ratio_hit) {
                    e.leaf = up.state.t;  // degenerate: batch done inside stage 0
                    continue;
                }
                e.child_real = branch_realizations(up.poly, up.box, ctrl.branching);
                e.child_leaf.resize(nb * nc);
                for (int b2 = 0; b2 < nb; ++b2)
                    for (std::size_t c2 = 0; c2 < nc; ++c2) {
                        auto u2 = predicted_update(up.poly, up.state, cands[c2],
                                                   e.child_real[b2], cfg);
                        e.child_leaf[b2 * nc + c2] =
                            leaf_cost(u2, e.child_real[b2], est.prior(), cfg);
                    }
            }
        }
    }

    const int mid_branch = nb / 2;  // realizations come ordered lo, mid, hi
    std::size_t ce_idx = 0;
    for (std::size_t c = 0; c < nc; ++c)
        if (std::abs(cands[c] - ce_u) < 1e-12) ce_idx = c;

    // assignment = stage-0 candidate (+ one stage-1 candidate per branch)
    auto assignment_cost = [&](std::size_t c0, const std::vector<std::size_t>& c1,
                               std::vector<double>& J) {
        J.clear();
        if (ctrl.robust_horizon == 1) {
            for (int b = 0; b < nb; ++b) J.push_back(eval[b * nc + c0].leaf);
        } else {
            for (int b = 0; b < nb; ++b) {
                const Stage0& e = eval[b * nc + c0];
                if (e.child_leaf.empty()) {
                    for (int b2 = 0; b2 < nb; ++b2) J.push_back(e.leaf);
                } else {
                    for (int b2 = 0; b2 < nb; ++b2)
                        J.push_back(e.child_leaf[b2 * nc + c1[b]]);
                }
            }
        }
        double jref;
        if (ctrl.dual_reference == DualReference::MidScenario) {
            jref = ctrl.robust_horizon == 1 ? J[mid_branch]
                                            : J[mid_branch * nb + mid_branch];
        } else {
            jref = 0.0;  // filled by caller for CeNominal
        }
        return jref;
    };

    std::vector<double> J;
    double ce_ref = 0.0;
    {
        std::vector<std::size_t> ce_c1(nb, ce_idx);
        assignment_cost(ce_idx, ce_c1, J);
        ce_ref = ctrl.robust_horizon == 1 ? J[mid_branch] : J[mid_branch * nb + mid_branch];
    }

    auto objective_of = [&](std::size_t c0, const std::vector<std::size_t>& c1) {
        const double jref_mid = assignment_cost(c0, c1, J);
        const double jref =
            ctrl.dual_reference == DualReference::MidScenario ? jref_mid : ce_ref;
        double obj = 0.0;
        for (double j : J) {
            if (!std::isfinite(j)) return std::numeric_limits<double>::infinity();
            obj += (j - jref) * (j - jref);
        }
        return obj;
    };

    DualDecision best;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_c1(nb, ce_idx);
    double ce_obj = 0.0;

    std::vector<std::size_t> c1(nb, ce_idx);
    auto consider = [&](std::size_t c0, const std::vector<std::size_t>& cc1) {
        const double obj = objective_of(c0, cc1);
        const bool is_ce = c0 == ce_idx &&
                           std::all_of(cc1.begin(), cc1.end(),
                                       [&](std::size_t i) { return i == ce_idx; });
        if (is_ce) ce_obj = obj;
        if (obj < best_obj - 1e-10 * (1.0 + std::abs(best_obj))) {
            best_obj = obj;
            best.u = cands[c0];
            best_c1 = cc1;
        }
    };

    if (ctrl.robust_horizon == 1) {
        for (std::size_t c0 = 0; c0 < nc; ++c0) consider(c0, c1);
    } else {
        // enumerate per-branch stage-1 candidates jointly with the shared c0
        for (std::size_t c0 = 0; c0 < nc; ++c0) {
            std::vector<std::size_t> idx(nb, 0);
            while (true) {
                consider(c0, idx);
                int j = 0;
                for (; j < nb; ++j) {
                    if (++idx[j] < nc) break;
                    idx[j] = 0;
                }
                if (j == nb) break;
            }
        }
    }

    // ties (within numeric noise of the leaf sims) resolve to the CE action
    if (best_obj >= ce_obj - 1e-7 * (1.0 + std::abs(ce_obj))) {
        best.u = ce_u;
        best_obj = ce_obj;
        best_c1.assign(nb, ce_idx);
    }
    best.objective = best_obj;
    best.probe = std::abs(best.u - ce_u) > 1e-12;

    // fill the solved tree for the chosen assignment
    std::size_t c0 = ce_idx;
    for (std::size_t c = 0; c < nc; ++c)
        if (std::abs(cands[c] - best.u) < 1e-12) c0 = c;
    for (int b = 0; b < nb; ++b) {
        const Stage0& e = eval[b * nc + c0];
        auto& node = tree.nodes[1 + b];
        node.input = cands[c0];
        if (ctrl.robust_horizon == 1) {
            node.leaf_cost = e.leaf;
            node.ratio_hit = e.ratio_hit;
        } else if (!e.child_leaf.empty()) {
            for (int b2 = 0; b2 < nb; ++b2) {
                ScenarioNode child;
                child.stage = 1;
                child.parent = 1 + b;
                child.realization = e.child_real[b2];
                child.state = e.state;
                child.box = e.box;
                child.input = cands[best_c1[b]];
                child.leaf_cost = e.child_leaf[b2 * nc + best_c1[b]];
                tree.nodes.push_back(child);
            }
        }
    }
    tree.objective = best_obj;
    tree.chosen_input = best.u;
    best.tree = std::move(tree);
    return best;
}

// ---- noise ------------------------------------------------------------------

NoiseStream::NoiseStream(std::uint64_t seed, double sigma) : s_(seed), sigma_(sigma) {
    if (s_ == 0) s_ = 0x9e3779b97f4a7c15ull;
}

double NoiseStream::next() {
    // splitmix64; portable and plenty for bounded measurement noise
    s_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    const double u01 = static_cast<double>(z >> 11) * 0x1.0p-53;
    return sigma_ * (2.0 * u01 - 1.0);
}

// ---- Algorithm 1 real-time loop ----------------------------------------------

namespace {

struct SampleOutcome {
    ProcessState state;
    bool ratio_hit = false;
    std::vector<estim::Measurement> meas;
};

// Apply one sampling interval. With an override the input is held constant;
// otherwise the policy automaton runs: u = 0 while S(x, params) > 0, then the
// singular level. The terminal ratio event always interrupts.
SampleOutcome apply_sample(const ProcessState& x0, const GammaParams& params,
                           bool has_override, double u_override, const PlantConfig& cfg,
                           const GammaParams& p_true, NoiseStream& noise,
                           bool want_meas, std::vector<InputSegment>& inputs,
                           Trajectory* states) {
    SampleOutcome out;
    out.state = x0;
    const double ratio = cfg.target_ratio();
    const int slices = static_cast<int>(std::round(cfg.Ts / cfg.meas_period));
    const double us = singular_control(params);

    auto log_input = [&](double t, double u) {
        if (inputs.empty() || std::abs(inputs.back().u - u) > 1e-15)
            inputs.push_back({t, u});
    };

    for (int s = 0; s < slices && !out.ratio_hit; ++s) {
        double t_slice_end = x0.t + (s + 1) * cfg.meas_period;
        ProcessState x = out.state;
        while (x.t < t_slice_end - 1e-13) {
            double u;
            bool on_first_arc = false;
            if (has_override) {
                u = u_override;
            } else {
                on_first_arc = switching_value(x, params) > 0.0;
                u = on_first_arc ? 0.0 : us;
            }
            log_input(x.t, u);

            IntegrateOptions io;
            io.t_cap = t_slice_end - x.t;
            io.cap_is_stop = true;
            StopCondition stop =
                (!has_override && on_first_arc)
                    ? StopCondition::for_event(
                          [&params, ratio](const ProcessState& s_) {
                              return std::min(switching_value(s_, params),
                                              ratio - s_.c1 / s_.c2);
                          },
                          -1)
                    : StopCondition::for_ratio(ratio);
            auto arc = integrate_arc(x, u, p_true, cfg, stop, io);
            x = arc.state;
            if (arc.event_hit) {
                if (x.c1 / x.c2 >= ratio * (1.0 - 1e-12)) {
                    out.ratio_hit = true;
                    break;
                }
                // S crossed inside the slice: continue on the singular level
                continue;
            }
        }
        out.state = x;
        if (states && !out.ratio_hit)
            states->push_back({x.t, x.c1, x.c2, inputs.back().u, permeate_flux(x, p_true)});
        if (out.ratio_hit) break;
        if (want_meas) {
            const double draw = noise.next();
            out.meas.push_back(estim::simulate_measurement(p_true, x, draw, cfg.sigma));
        }
    }
    return out;
}

}  // namespace

BatchResult run_algorithm1(const GammaParams& p_true, const PlantConfig& cfg,
                           const ControllerConfig& ctrl, const estim::GammaPrior& prior,
                           NoiseStream& noise) {
    using clock = std::chrono::steady_clock;
    BatchResult res;
    cfg.validate();
    ctrl.validate();

    try {
        const GammaParams p_mid = prior.mid();
        const ProcessState x0{cfg.c1_0, cfg.c2_0, 0.0};
        if (switching_value(x0, p_true) <= 0.0 || switching_value(x0, p_mid) <= 0.0)
            throw WrongInitialArc("run_algorithm1: initial state not on the u=0 arc");

        // Initialization: nominal policy at mid(P0), intervals from the prior
        auto nominal = solve_nominal(p_mid, cfg, x0);
        GammaParams params_hat = p_mid;

        const bool estimating = ctrl.kind != ControllerKind::Nominal;
        Estimator est(prior, cfg.sigma);
        project::SwitchIntervals iv =
            project::project_switch_times(est.gamma_box(), x0, cfg);
        res.bounds.push_back({0.0, est.p_box(), est.gamma_box()});
        res.intervals.push_back({0.0, iv});

        // varmin carries its last decision between re-solves
        bool vm_switched = false;
        double vm_us = nominal.policy.u_s;

        ProcessState x = x0;
        res.states.push_back({0.0, x.c1, x.c2, 0.0, permeate_flux(x, p_true)});

        int phase = 0;  // 0: t1, 1: t2, 2: tf
        bool ratio_hit = false;
        while (!ratio_hit) {
            if (x.t > 40.0) throw ControlError("run_algorithm1: batch did not terminate");
            const estim::Interval phase_iv =
                phase == 0 ? iv.t1 : (phase == 1 ? iv.t2 : iv.tf);
            if (phase < 2 && x.t > phase_iv.mid() - cfg.Ts) {
                ++phase;
                continue;
            }

            // re-solve gate
            bool has_override = false;
            double u_override = 0.0;
            const bool in_phase = x.t <= phase_iv.mid() - cfg.Ts || phase == 2;
            if (estimating && in_phase) {
                if (phase_iv.diam() >= ctrl.eps) {
                    const auto t_start = clock::now();
                    if (ctrl.kind == ControllerKind::Adaptive) {
                        if (ctrl.adaptive_mode == AdaptiveMode::CertaintyEquivalent) {
                            params_hat = est.gamma_mid();
                        } else {
                            auto d = adaptive_step_varmin(x, est.gamma_box(), cfg);
                            params_hat = est.gamma_mid();
                            vm_switched = vm_switched || d.switch_now;
                            vm_us = d.u_s;
                            has_override = true;
                            u_override = vm_switched ? vm_us : 0.0;
                        }
                    } else {  // dual
                        params_hat = est.gamma_mid();
                        auto d = dual_step(x, est, ctrl, cfg);
                        if (d.probe) {
                            has_override = true;
                            u_override = d.u;
                            ++res.probe_samples;
                        }
                    }
                    res.solve_seconds.push_back(
                        std::chrono::duration<double>(clock::now() - t_start).count());
                    ++res.resolves;
                } else {
                    ++res.skips;
                }
            }
            if (!has_override && ctrl.kind == ControllerKind::Adaptive &&
                ctrl.adaptive_mode == AdaptiveMode::VarianceMin) {
                has_override = true;
                u_override = vm_switched ? vm_us : 0.0;
            }

            auto sample = apply_sample(x, params_hat, has_override, u_override, cfg,
                                       p_true, noise, estimating, res.inputs, &res.states);
            x = sample.state;
            ratio_hit = sample.ratio_hit;
            if (ratio_hit) break;

            if (estimating) {
                est.update(sample.meas);
                iv = project::project_switch_times(est.gamma_box(), x, cfg);
                res.bounds.push_back({x.t, est.p_box(), est.gamma_box()});
                res.intervals.push_back({x.t, iv});
            }
        }

        // terminal impulse at the ratio event
        res.dilution_factor = x.c1 / cfg.c1_f;
        res.terminal = apply_dilution(x, res.dilution_factor);
        res.tf = res.terminal.t;
        res.resid_c1 = std::abs(res.terminal.c1 - cfg.c1_f);
        res.resid_c2 = std::abs(res.terminal.c2 - cfg.c2_f);
        res.states.push_back({res.tf, res.terminal.c1, res.terminal.c2, 0.0,
                              permeate_flux(res.terminal, p_true)});
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    return res;
}

}  // namespace difc::control
