#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Small dense linear programming: min c.x subject to A x <= b with a handful
// of variables and up to a few hundred rows. Solved as the dual in revised
// form, so the working basis stays n-by-n; Bland's rule keeps pivoting
// deterministic and cycle-free. The primal optimum falls out of the final
// simplex multipliers.

namespace difc::lp {

constexpr std::size_t kMaxVars = 6;

struct LpInternalError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double value = 0.0;                    // c.x at the optimum
    std::array<double, kMaxVars> x{};      // primal point (valid when Optimal)
};

struct Problem {
    std::size_t n = 0;                 // number of variables (<= kMaxVars)
    std::vector<double> rows;          // m rows of n coefficients, row-major
    std::vector<double> rhs;           // m entries

    std::size_t m() const { return rhs.size(); }
    void add_row(const double* a, double b) {
        rows.insert(rows.end(), a, a + n);
        rhs.push_back(b);
    }
};

Result minimize(const Problem& p, const double* c);
Result maximize(const Problem& p, const double* c);

// Is {x : A x <= b} nonempty?
bool feasible(const Problem& p);

}  // namespace difc::lp
