#include "difc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace difc::lp {
namespace {

constexpr double kTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense n-by-n solve with partial pivoting; A and rhsb are clobbered.
bool solve_n(std::size_t n, double* A, double* rhsb) {
    std::array<std::size_t, kMaxVars> perm{};
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(A[perm[col] * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(A[perm[r] * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-14) return false;
        std::swap(perm[col], perm[piv]);
        const double d = A[perm[col] * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[perm[r] * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) A[perm[r] * n + k] -= f * A[perm[col] * n + k];
            rhsb[perm[r]] -= f * rhsb[perm[col]];
        }
    }
    std::array<double, kMaxVars> sol{};
    for (std::size_t i = n; i-- > 0;) {
        double v = rhsb[perm[i]];
        for (std::size_t k = i + 1; k < n; ++k) v -= A[perm[i] * n + k] * sol[k];
        sol[i] = v / A[perm[i] * n + i];
    }
    for (std::size_t i = 0; i < n; ++i) rhsb[i] = sol[i];
    return true;
}

// Revised simplex over the dual:  min cost.y  s.t.  [A^T | D] y = q, y >= 0,
// where columns 0..m-1 are the primal row normals and m..m+n-1 artificials.
// The basis is n columns; everything is recomputed from it each iteration,
// which is cheap at this size and immune to update drift.
struct DualSimplex {
    const Problem& p;
    std::size_t n, m;
    std::array<double, kMaxVars> q{};         // = -c
    std::array<double, kMaxVars> art_sign{};
    std::array<std::size_t, kMaxVars> basis{};
    std::array<double, kMaxVars> xb{};
    std::array<double, kMaxVars> mult{};

    explicit DualSimplex(const Problem& prob) : p(prob), n(prob.n), m(prob.m()) {}

    void column(std::size_t j, double* out) const {
        if (j < m) {
            for (std::size_t i = 0; i < n; ++i) out[i] = p.rows[j * n + i];
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
            out[j - m] = art_sign[j - m];
        }
    }

    void basis_matrix(double* B) const {
        std::array<double, kMaxVars> col{};
        for (std::size_t k = 0; k < n; ++k) {
            column(basis[k], col.data());
            for (std::size_t i = 0; i < n; ++i) B[i * n + k] = col[i];
        }
    }

    void recompute_basics() {
        std::array<double, kMaxVars * kMaxVars> B{};
        basis_matrix(B.data());
        xb = q;
        if (!solve_n(n, B.data(), xb.data())) throw LpInternalError("lp: singular basis");
    }

    void compute_multipliers(const double* cost_basic) {
        std::array<double, kMaxVars * kMaxVars> Bt{};
        std::array<double, kMaxVars> col{};
        for (std::size_t k = 0; k < n; ++k) {
            column(basis[k], col.data());
            for (std::size_t i = 0; i < n; ++i) Bt[k * n + i] = col[i];
        }
        for (std::size_t k = 0; k < n; ++k) mult[k] = cost_basic[k];
        if (!solve_n(n, Bt.data(), mult.data())) throw LpInternalError("lp: singular basis");
    }

    bool is_basic(std::size_t j) const {
        for (std::size_t k = 0; k < n; ++k)
            if (basis[k] == j) return true;
        return false;
    }

    // One simplex phase. In phase 2 artificials may linger in the basis at
    // value zero: they cost nothing, may not enter, and block the ratio test
    // at zero so any improving pivot evicts them first. Optimality is still
    // certified by the reduced costs of the real columns alone, which is
    // exactly primal feasibility of the multipliers.
    // Returns false on unbounded descent.
    template <typename CostFn>
    bool run(CostFn col_cost, bool phase2) {
        const std::size_t max_iter = 50 * (m + n) + 200;
        std::array<double, kMaxVars> cb{}, w{}, col{};
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            for (std::size_t k = 0; k < n; ++k) cb[k] = col_cost(basis[k]);
            recompute_basics();
            compute_multipliers(cb.data());

            // Bland: lowest-index nonbasic column with negative reduced cost
            std::size_t enter = m + n;
            for (std::size_t j = 0; j < m + n; ++j) {
                if (phase2 && j >= m) break;
                if (is_basic(j)) continue;
                column(j, col.data());
                double rc = col_cost(j);
                for (std::size_t i = 0; i < n; ++i) rc -= mult[i] * col[i];
                if (rc < -kTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == m + n) return true;  // optimal

            column(enter, col.data());
            std::array<double, kMaxVars * kMaxVars> B{};
            basis_matrix(B.data());
            w = col;
            if (!solve_n(n, B.data(), w.data())) throw LpInternalError("lp: singular basis");

            double theta = kInf;
            std::size_t leave = n;
            auto propose = [&](double t, std::size_t k) {
                if (t < theta - kTol || leave == n ||
                    (t < theta + kTol && basis[k] < basis[leave])) {
                    theta = t;
                    leave = k;
                }
            };
            for (std::size_t k = 0; k < n; ++k) {
                if (phase2 && basis[k] >= m) {
                    if (std::abs(w[k]) > kTol) propose(0.0, k);
                    continue;
                }
                if (w[k] > kTol) propose(std::max(xb[k], 0.0) / w[k], k);
            }
            if (leave == n) return false;  // unbounded
            basis[leave] = enter;
        }
        throw LpInternalError("lp: iteration cap exceeded");
    }
};

}  // namespace

Result minimize(const Problem& p, const double* c) {
    const std::size_t n = p.n, m = p.m();
    if (n == 0 || n > kMaxVars) throw LpInternalError("lp: bad dimension");

    DualSimplex s(p);
    for (std::size_t i = 0; i < n; ++i) {
        s.q[i] = -c[i];
        s.art_sign[i] = s.q[i] >= 0.0 ? 1.0 : -1.0;
        s.basis[i] = m + i;
    }

    // phase 1: drive the artificial sum to zero
    if (!s.run([m](std::size_t j) { return j < m ? 0.0 : 1.0; }, false))
        throw LpInternalError("lp: phase-1 unbounded");
    s.recompute_basics();
    double art_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (s.basis[k] >= m) art_sum += std::abs(s.xb[k]);
    if (art_sum > 1e-8) {
        Result r;
        r.status = Status::Unbounded;  // dual infeasible
        return r;
    }

    // phase 2: min b.y over plain columns only
    auto ph2 = [&](std::size_t j) { return j < m ? p.rhs[j] : 0.0; };
    if (!s.run(ph2, true)) {
        Result r;
        r.status = Status::Infeasible;  // dual unbounded below
        return r;
    }

    // at optimality the multipliers are a primal-feasible, complementary
    // point, i.e. the primal optimum
    std::array<double, kMaxVars> cb{};
    for (std::size_t k = 0; k < n; ++k) cb[k] = ph2(s.basis[k]);
    s.compute_multipliers(cb.data());

    Result r;
    r.status = Status::Optimal;
    for (std::size_t i = 0; i < n; ++i) r.x[i] = s.mult[i];
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += c[i] * r.x[i];
    r.value = v;
    return r;
}

Result maximize(const Problem& p, const double* c) {
    std::array<double, kMaxVars> nc{};
    for (std::size_t i = 0; i < p.n; ++i) nc[i] = -c[i];
    Result r = minimize(p, nc.data());
    r.value = -r.value;
    return r;
}

bool feasible(const Problem& p) {
    std::array<double, kMaxVars> c{};
    c[0] = 1.0;
    Result lo = minimize(p, c.data());
    if (lo.status == Status::Optimal) return true;
    if (lo.status == Status::Infeasible) return false;
    Result hi = maximize(p, c.data());
    return hi.status != Status::Infeasible;
}

}  // namespace difc::lp
