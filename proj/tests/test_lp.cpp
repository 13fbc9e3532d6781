#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "difc/lp.hpp"

using namespace difc;

namespace {

// brute-force oracle: enumerate all vertex candidates (triples of tight rows),
// keep the feasible ones, optimize over them
struct Brute {
    std::vector<std::array<double, 3>> rows;
    std::vector<double> rhs;

    void add(std::array<double, 3> a, double b) {
        rows.push_back(a);
        rhs.push_back(b);
    }

    bool solve3(const std::array<int, 3>& idx, std::array<double, 3>& x) const {
        double A[9], b[3];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) A[i * 3 + j] = rows[idx[i]][j];
            b[i] = rhs[idx[i]];
        }
        // Cramer
        auto det3 = [](const double* m) {
            return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                   m[2] * (m[3] * m[7] - m[4] * m[6]);
        };
        const double d = det3(A);
        if (std::abs(d) < 1e-10) return false;
        for (int j = 0; j < 3; ++j) {
            double M[9];
            for (int i = 0; i < 9; ++i) M[i] = A[i];
            for (int i = 0; i < 3; ++i) M[i * 3 + j] = b[i];
            x[j] = det3(M) / d;
        }
        return true;
    }

    bool feasible_pt(const std::array<double, 3>& x, double tol = 1e-8) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double v = 0;
            for (int j = 0; j < 3; ++j) v += rows[r][j] * x[j];
            if (v > rhs[r] + tol) return false;
        }
        return true;
    }

    // returns {found, min, max} of c.x over the vertex set
    std::array<double, 3> optimize(const std::array<double, 3>& c) const {
        bool found = false;
        double lo = 0, hi = 0;
        const int m = static_cast<int>(rows.size());
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (int k = j + 1; k < m; ++k) {
                    std::array<double, 3> x;
                    if (!solve3({i, j, k}, x) || !feasible_pt(x)) continue;
                    const double v = c[0] * x[0] + c[1] * x[1] + c[2] * x[2];
                    if (!found) {
                        lo = hi = v;
                        found = true;
                    } else {
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                }
        return {found ? 1.0 : 0.0, lo, hi};
    }
};

lp::Problem to_problem(const Brute& b) {
    lp::Problem p;
    p.n = 3;
    for (std::size_t r = 0; r < b.rows.size(); ++r) p.add_row(b.rows[r].data(), b.rhs[r]);
    return p;
}

}  // namespace

TEST_CASE("boxes and simple cuts") {
    Brute br;
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> e{};
        e[j] = 1.0;
        br.add(e, 2.0 + j);
        e[j] = -1.0;
        br.add(e, 1.0);  // x_j >= -1
    }
    auto p = to_problem(br);
    const std::array<double, 3> c{1.0, -2.0, 0.5};
    auto mn = lp::minimize(p, c.data());
    REQUIRE(mn.status == lp::Status::Optimal);
    CHECK(mn.value == doctest::Approx(-1.0 - 6.0 - 0.5).epsilon(1e-10));
    CHECK(mn.x[0] == doctest::Approx(-1.0));
    CHECK(mn.x[1] == doctest::Approx(3.0));
    CHECK(mn.x[2] == doctest::Approx(-1.0));

    // a diagonal cut through the box
    br.add({1.0, 1.0, 1.0}, 1.0);
    p = to_problem(br);
    auto mx = lp::maximize(p, c.data());
    REQUIRE(mx.status == lp::Status::Optimal);
    auto ref = br.optimize(c);
    REQUIRE(ref[0] == 1.0);
    CHECK(mx.value == doctest::Approx(ref[2]).epsilon(1e-9));
}

TEST_CASE("infeasible and unbounded detection") {
    lp::Problem p;
    p.n = 3;
    double a[3] = {1, 0, 0};
    p.add_row(a, 1.0);  // x <= 1
    double b[3] = {-1, 0, 0};
    p.add_row(b, -2.0);  // x >= 2
    const std::array<double, 3> c{1.0, 0.0, 0.0};
    CHECK(lp::minimize(p, c.data()).status == lp::Status::Infeasible);
    CHECK_FALSE(lp::feasible(p));

    lp::Problem q;
    q.n = 3;
    q.add_row(a, 1.0);  // only x1 <= 1: min x1 unbounded
    CHECK(lp::minimize(q, c.data()).status == lp::Status::Unbounded);
    CHECK(lp::feasible(q));
}

TEST_CASE("random instances agree with vertex enumeration") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int solved = 0;
    for (int inst = 0; inst < 40; ++inst) {
        Brute br;
        for (int j = 0; j < 3; ++j) {  // bounding box keeps everything finite
            std::array<double, 3> e{};
            e[j] = 1.0;
            br.add(e, 3.0);
            e[j] = -1.0;
            br.add(e, 3.0);
        }
        const int extra = 3 + static_cast<int>(rng() % 8);
        for (int r = 0; r < extra; ++r) {
            std::array<double, 3> a{u(rng), u(rng), u(rng)};
            const double nn = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
            if (nn < 0.3) continue;
            for (auto& v : a) v /= nn;
            br.add(a, u(rng) + 1.2);
        }
        auto p = to_problem(br);
        const std::array<double, 3> c{u(rng), u(rng), u(rng)};
        const auto ref = br.optimize(c);
        const auto mn = lp::minimize(p, c.data());
        const auto mx = lp::maximize(p, c.data());
        if (ref[0] == 0.0) continue;  // degenerate instance, skip
        REQUIRE(mn.status == lp::Status::Optimal);
        REQUIRE(mx.status == lp::Status::Optimal);
        CHECK(mn.value == doctest::Approx(ref[1]).epsilon(1e-7));
        CHECK(mx.value == doctest::Approx(ref[2]).epsilon(1e-7));
        // returned points must be feasible and attain the value
        CHECK(br.feasible_pt({mn.x[0], mn.x[1], mn.x[2]}, 1e-7));
        CHECK(br.feasible_pt({mx.x[0], mx.x[1], mx.x[2]}, 1e-7));
        ++solved;
    }
    CHECK(solved >= 30);
}

TEST_CASE("four-variable problems (projection helper shape)") {
    // min t s.t. |x_j - 0.5| <= t over the unit box shifted
    lp::Problem p;
    p.n = 4;
    for (int j = 0; j < 3; ++j) {
        double r1[4] = {0, 0, 0, -1.0};
        r1[j] = 1.0;
        p.add_row(r1, 0.5);
        double r2[4] = {0, 0, 0, -1.0};
        r2[j] = -1.0;
        p.add_row(r2, -0.5);
        double r3[4] = {0, 0, 0, 0};
        r3[j] = 1.0;
        p.add_row(r3, 2.0);
        r3[j] = -1.0;
        p.add_row(r3, 2.0);
    }
    double pos[4] = {0, 0, 0, -1.0};
    p.add_row(pos, 0.0);
    const double c[4] = {0, 0, 0, 1.0};
    auto r = lp::minimize(p, c);
    REQUIRE(r.status == lp::Status::Optimal);
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-9));
    for (int j = 0; j < 3; ++j) CHECK(r.x[j] == doctest::Approx(0.5).epsilon(1e-8));
}
