#include "difc/setmem.hpp"

#include <algorithm>
#include <cmath>

namespace difc::estim {

Measurement simulate_measurement(const GammaParams& p_true, const ProcessState& state,
                                 double noise_draw, double sigma) {
    if (std::abs(noise_draw) > sigma)
        throw NoiseOutOfBound("simulate_measurement: |noise| exceeds sigma");
    return {state.t, permeate_flux(state, p_true) + noise_draw, state.c1, state.c2};
}

ParamPolytope::ParamPolytope(const ParamBox& prior_box, std::size_t prune_limit)
    : prior_(prior_box), prune_limit_(prune_limit) {
    prob_.n = 3;
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> e{};
        e[j] = 1.0;
        prob_.add_row(e.data(), prior_box.hi[j]);
        e[j] = -1.0;
        prob_.add_row(e.data(), -prior_box.lo[j]);
    }
    fixed_rows_ = prob_.m();
}

void ParamPolytope::add_halfspace(const std::array<double, 3>& a, double b) {
    const double nrm = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    std::array<double, 3> an{a[0] / nrm, a[1] / nrm, a[2] / nrm};
    prob_.add_row(an.data(), b / nrm);
}

void ParamPolytope::add_measurement(const Measurement& m, double sigma) {
    const std::array<double, 3> a{1.0, -std::log(m.c1), -std::log(m.c2)};
    add_halfspace(a, m.qp_meas + sigma);
    add_halfspace({-a[0], -a[1], -a[2]}, -(m.qp_meas - sigma));
    if (prob_.m() > prune_limit_) prune(bound_p());
}

ParamBox ParamPolytope::bound_p() const {
    ParamBox box;
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> c{};
        c[j] = 1.0;
        auto lo = lp::minimize(prob_, c.data());
        if (lo.status == lp::Status::Infeasible)
            throw Infeasible("bound_p: empty feasible set (noise bound violated?)");
        if (lo.status != lp::Status::Optimal)
            throw Unbounded("bound_p: unbounded despite prior faces");
        auto hi = lp::maximize(prob_, c.data());
        if (hi.status != lp::Status::Optimal)
            throw Unbounded("bound_p: unbounded despite prior faces");
        box.lo[j] = lo.value;
        box.hi[j] = hi.value;
    }
    return box;
}

void ParamPolytope::prune(const ParamBox& box) {
    lp::Problem kept;
    kept.n = 3;
    const std::size_t m = prob_.m();
    for (std::size_t r = 0; r < m; ++r) {
        const double* a = &prob_.rows[r * 3];
        bool keep = r < fixed_rows_;
        if (!keep) {
            // max of a.p over the hull; redundant rows can't bind on the polytope
            double worst = 0.0;
            for (int j = 0; j < 3; ++j)
                worst += a[j] > 0.0 ? a[j] * box.hi[j] : a[j] * box.lo[j];
            keep = worst > prob_.rhs[r] - 1e-12;
        }
        if (keep) kept.add_row(a, prob_.rhs[r]);
    }
    prob_ = std::move(kept);
}

namespace {

// is  poly ∩ {p[num] - r p[den] = 0}  nonempty?
bool ratio_feasible(const lp::Problem& base, int num, int den, double r) {
    lp::Problem prob = base;
    std::array<double, 3> a{};
    a[num] = 1.0;
    a[den] = -r;
    const double nrm = std::sqrt(1.0 + r * r);
    a[num] /= nrm;
    a[den] /= nrm;
    prob.add_row(a.data(), 0.0);
    a[num] = -a[num];
    a[den] = -a[den];
    prob.add_row(a.data(), 0.0);
    return lp::feasible(prob);
}

Interval ratio_bounds(const lp::Problem& base, const ParamBox& pbox, int num, int den,
                      double tol, const Interval* warm) {
    // outer brackets from the hull (p2 > 0 throughout the prior)
    double out_lo = pbox.lo[num] / pbox.hi[den];
    double out_hi = pbox.hi[num] / pbox.lo[den];
    if (warm) {
        out_lo = std::max(out_lo, warm->lo);
        out_hi = std::min(out_hi, warm->hi);
    }

    // feasible seed ratios from hull-extremal vertices
    std::array<double, 3> c{};
    c[num] = 1.0;
    const auto vmax = lp::maximize(base, c.data());
    const auto vmin = lp::minimize(base, c.data());
    if (vmax.status != lp::Status::Optimal || vmin.status != lp::Status::Optimal)
        throw Infeasible("ratio_bounds: empty polytope");
    const double seed_hi = vmax.x[num] / vmax.x[den];
    const double seed_lo = vmin.x[num] / vmin.x[den];

    double lo = out_lo, hi = std::max(seed_lo, out_lo);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_feasible(base, num, den, mid))
            hi = mid;
        else
            lo = mid;
    }
    const double r_lo = 0.5 * (lo + hi);

    lo = std::min(seed_hi, out_hi);
    hi = out_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_feasible(base, num, den, mid))
            lo = mid;
        else
            hi = mid;
    }
    const double r_hi = 0.5 * (lo + hi);
    return {std::min(r_lo, r_hi), std::max(r_lo, r_hi)};
}

}  // namespace

GammaBox ParamPolytope::bound_gamma(double tol, const GammaBox* warm) const {
    const ParamBox pbox = bound_p();
    GammaBox gb;
    gb.g1 = {pbox.lo[1], pbox.hi[1]};

    Interval warm_l2{}, warm_g3{};
    const Interval* wl2 = nullptr;
    const Interval* wg3 = nullptr;
    if (warm) {
        warm_l2 = {std::log(warm->g2.lo), std::log(warm->g2.hi)};
        warm_g3 = warm->g3;
        wl2 = &warm_l2;
        wg3 = &warm_g3;
    }
    const Interval l2 = ratio_bounds(prob_, pbox, 0, 1, tol, wl2);
    gb.g2 = {std::exp(l2.lo), std::exp(l2.hi)};
    gb.g3 = ratio_bounds(prob_, pbox, 2, 1, tol, wg3);
    return gb;
}

LpOutcome lp_solve(const std::array<double, 3>& objective, const ParamPolytope& poly,
                   Sense sense) {
    const auto r = sense == Sense::Min ? lp::minimize(poly.problem(), objective.data())
                                       : lp::maximize(poly.problem(), objective.data());
    if (r.status == lp::Status::Infeasible)
        throw Infeasible("lp_solve: empty feasible set");
    if (r.status != lp::Status::Optimal)
        throw Unbounded("lp_solve: unbounded objective");
    return {r.value, {r.x[0], r.x[1], r.x[2]}};
}

}  // namespace difc::estim
