#pragma once

#include <vector>

#include "bisimet/model.hpp"

namespace bisimet::lp {

struct LpSolution {
    Scalar value;
    Vec x;
    int pivots;
};

/**
 * Minimizes c·x subject to A x = b, x >= 0.
 *
 * Dense two-phase primal simplex. Pivoting follows Bland's rule (lowest
 * eligible index enters, ties in the ratio test broken by lowest basic
 * variable index), which rules out cycling on the degenerate bases that
 * transportation problems produce. Throws `solver_failure` on infeasible or
 * unbounded programs and when the pivot budget is exhausted.
 */
LpSolution solve(const Mat& A, const Vec& b, const Vec& c);

/// Phase-two solve from a caller-supplied feasible basis (one column index
/// per row; the basic solution it induces must be nonnegative).
LpSolution solve_with_basis(const Mat& A, const Vec& b, const Vec& c,
                            std::vector<Eigen::Index> basis);

}  // namespace bisimet::lp
