#include "bisimet/metric.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bisimet/transport.hpp"

namespace bisimet {

namespace {

void check_state(const Mdp& m, StateId x) {
    if (x < 0 || x >= m.n_states()) {
        std::ostringstream os;
        os << "state " << x << " out of range for " << m.n_states() << " states";
        throw Error(ErrorKind::index_out_of_range, os.str());
    }
}

void check_metric_size(const PMetric& d, const Mdp& m) {
    if (d.size() != m.n_states()) {
        std::ostringstream os;
        os << "metric on " << d.size() << " states against a model with " << m.n_states();
        throw Error(ErrorKind::dimension_mismatch, os.str());
    }
}

// Single-action lift without argument validation; the transport solve is
// skipped when it cannot contribute (c = 0 or identical successor rows).
Scalar lift_arm(const PMetric& d, Scalar c, const Mdp& m, Eigen::Index a, StateId x, StateId y) {
    const Scalar dr = std::abs(m.reward(a, x) - m.reward(a, y));
    if (c == 0.0) return dr;
    const Dist& mu = m.kernel(a, x);
    const Dist& nu = m.kernel(a, y);
    Scalar w = 0.0;
    if (!(mu == nu)) w = wasserstein_primal(d, mu, nu).value;
    return c * w + (1.0 - c) * dr;
}

}  // namespace

Scalar lift_mrp(const PMetric& d, const DiscountConfig& c, const ActionId& a, const Mdp& m,
                StateId x, StateId y) {
    m.check_action(a);
    check_state(m, x);
    check_state(m, y);
    check_metric_size(d, m);
    return lift_arm(d, c.c, m, a.index, x, y);
}

Scalar lift_mdp(const PMetric& d, const DiscountConfig& c, const Mdp& m, StateId x, StateId y) {
    check_state(m, x);
    check_state(m, y);
    check_metric_size(d, m);
    Scalar best = 0.0;
    for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
        best = std::max(best, lift_arm(d, c.c, m, a, x, y));
    }
    return best;
}

PMetric apply_functional(const PMetric& d, const DiscountConfig& c, const Mdp& m) {
    check_metric_size(d, m);
    const Eigen::Index n = m.n_states();
    Mat next = Mat::Zero(n, n);
    for (StateId x = 0; x < n; ++x) {
        for (StateId y = x + 1; y < n; ++y) {
            Scalar best = 0.0;
            for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                best = std::max(best, lift_arm(d, c.c, m, a, x, y));
            }
            next(x, y) = best;
            next(y, x) = best;
        }
    }
    return PMetric::unchecked(std::move(next));
}

int default_max_iters(const DiscountConfig& c, Scalar tol) {
    if (!(tol > 0.0)) throw Error(ErrorKind::validation, "tolerance must be positive");
    if (c.c == 0.0 || c.c == 1.0) return 1000;
    return 10 * static_cast<int>(std::ceil(std::log(tol) / std::log(c.c)));
}

FixpointReport bisim_metric(const Mdp& m, const DiscountConfig& c, Scalar tol, int max_iters,
                            const IterateObserver& observer) {
    if (!(tol > 0.0)) throw Error(ErrorKind::validation, "tolerance must be positive");
    if (max_iters <= 0) max_iters = default_max_iters(c, tol);
    const Eigen::Index n = m.n_states();
    PMetric d = zero_pmetric(n);

    if (c.c == 0.0) {
        // The functional ignores its argument, so its value at any point is
        // already the unique fixpoint.
        PMetric fix = apply_functional(d, c, m);
        if (observer) observer(1, fix);
        return {std::move(fix), 1, 0.0, true};
    }

    Scalar delta = std::numeric_limits<Scalar>::infinity();
    int it = 0;
    while (it < max_iters) {
        PMetric next = apply_functional(d, c, m);
        ++it;
        delta = (next.values() - d.values()).cwiseAbs().maxCoeff();
        d = std::move(next);
        if (observer) observer(it, d);
        if (delta <= tol) return {std::move(d), it, delta, true};
    }
    return {std::move(d), it, delta, false};
}

Scalar functional_residual(const Mdp& m, const DiscountConfig& c, const PMetric& d) {
    const PMetric next = apply_functional(d, c, m);
    return (next.values() - d.values()).maxCoeff();
}

bool certify_upper_bound(const Mdp& m, const DiscountConfig& c, const PMetric& d) {
    return functional_residual(m, c, d) <= 1e-9;
}

}  // namespace bisimet
