#pragma once

#include <functional>

#include "bisimet/model.hpp"

namespace bisimet {

/// Discount weight between the transport term and the reward term: the
/// one-step distance is c * W(d) + (1 - c) * |reward difference|. Both
/// extremes are allowed; c = 0 ignores dynamics, c = 1 ignores rewards.
struct DiscountConfig {
    Scalar c;

    explicit DiscountConfig(Scalar discount) : c(discount) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw Error(ErrorKind::validation, "discount must lie in [0,1]");
        }
    }
};

/// Result of the fixpoint iteration. `converged = false` is a valid outcome
/// (iteration budget exhausted), not an error; `metric` then holds the last
/// iterate and `final_delta` its last sup-norm change.
struct FixpointReport {
    PMetric metric;
    int iterations;
    Scalar final_delta;
    bool converged;
};

/// One-step distance of states `x`, `y` under a single action: the discounted
/// transport distance between their successor distributions plus the weighted
/// reward difference.
Scalar lift_mrp(const PMetric& d, const DiscountConfig& c, const ActionId& a, const Mdp& m,
                StateId x, StateId y);

/// One-step distance maximized over all actions.
Scalar lift_mdp(const PMetric& d, const DiscountConfig& c, const Mdp& m, StateId x, StateId y);

/// Applies the one-step functional to every state pair. Only the upper
/// triangle is solved; symmetry and the zero diagonal hold structurally.
PMetric apply_functional(const PMetric& d, const DiscountConfig& c, const Mdp& m);

/// Observer invoked after each functional application during iteration.
using IterateObserver = std::function<void(int iteration, const PMetric& iterate)>;

/// Iteration budget used when none is given: 10 * ceil(log(tol)/log(c)) for
/// c strictly between 0 and 1, 1000 at the extremes.
int default_max_iters(const DiscountConfig& c, Scalar tol);

/**
 * Least fixpoint of the one-step functional by iteration from the zero
 * metric. Stops when the sup-norm change drops to `tol` or after `max_iters`
 * applications (pass 0 to use `default_max_iters`). With c = 0 the
 * functional does not depend on its argument, so a single application
 * reaches the fixpoint exactly and the report says so.
 */
FixpointReport bisim_metric(const Mdp& m, const DiscountConfig& c, Scalar tol = 1e-9,
                            int max_iters = 0, const IterateObserver& observer = {});

/// Largest entry of apply_functional(d) - d (negative when d is a strict
/// prefixpoint everywhere).
Scalar functional_residual(const Mdp& m, const DiscountConfig& c, const PMetric& d);

/**
 * Certifies `d` as an upper bound on the fixpoint metric: true iff
 * apply_functional(d) <= d + 1e-9 entrywise. Any such prefixpoint dominates
 * the least fixpoint, so a `true` answer is a sound certificate.
 */
bool certify_upper_bound(const Mdp& m, const DiscountConfig& c, const PMetric& d);

}  // namespace bisimet
