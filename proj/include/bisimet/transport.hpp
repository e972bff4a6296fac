#pragma once

#include <limits>

#include "bisimet/model.hpp"

namespace bisimet {

/**
 * Solution of one transportation problem between two distributions.
 *
 * `value` is the optimal transport cost. `coupling` (when present) is a
 * primal optimizer: nonnegative, row sums equal to the first marginal and
 * column sums to the second within `marginal_tol`, and `value` equals the
 * cost of `coupling` within `value_tol`. `potential` (when present) is a
 * dual optimizer: values in [0,1], short with respect to the cost metric
 * within `shortness_tol`. `gap` is |primal - dual| when both routes were
 * solved and NaN otherwise. Which optimizer is returned among equally good
 * vertices is solver-determined and not part of the contract.
 */
struct TransportSolution {
    Scalar value = 0;
    Mat coupling;
    Vec potential;
    Scalar gap = std::numeric_limits<Scalar>::quiet_NaN();

    static constexpr Scalar marginal_tol = 1e-8;
    static constexpr Scalar value_tol = 1e-8;
    static constexpr Scalar shortness_tol = 1e-9;
    static constexpr Scalar gap_tol = 1e-6;
};

/// Expected value of predicate `p` under distribution `mu`.
Scalar expectation(const Eigen::Ref<const Vec>& p, const Dist& mu);

/**
 * Minimizes the expected cost over couplings of (`mu`, `nu`):
 * the transportation problem with cost matrix `d`, solved as a dense linear
 * program. Fills `value` and `coupling`; `potential` stays empty until a
 * dual solve. States with zero probability keep their LP rows with zero
 * supply/demand.
 */
TransportSolution wasserstein_primal(const PMetric& d, const Dist& mu, const Dist& nu);

/**
 * Maximizes sum_x h(x) (mu(x) - nu(x)) over potentials h in [0,1]^X that are
 * short with respect to `d` (h(x) - h(y) <= d(x,y) for all pairs). By
 * duality the optimum equals the primal transport cost. Fills `value` and
 * `potential`.
 */
TransportSolution wasserstein_dual(const PMetric& d, const Dist& mu, const Dist& nu);

/// |primal - dual| from two independent solves.
Scalar duality_gap(const PMetric& d, const Dist& mu, const Dist& nu);

/// Runs both routes and returns a fully populated solution (gap included).
TransportSolution solve_transport(const PMetric& d, const Dist& mu, const Dist& nu);

/**
 * Order-p transport distance: the p-th root of the optimal cost under the
 * entrywise p-th power of `d`. Requires p >= 1 (`invalid_exponent`
 * otherwise); p = 1 coincides with `wasserstein_primal`'s value.
 */
Scalar wasserstein_p(const PMetric& d, const Dist& mu, const Dist& nu, Scalar p);

}  // namespace bisimet
