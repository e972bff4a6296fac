#include "bisimet/transport.hpp"

#include <cmath>
#include <sstream>

#include "bisimet/simplex.hpp"

namespace bisimet {

namespace {

void check_sizes(Eigen::Index n, const Dist& mu, const Dist& nu) {
    if (mu.size() != n || nu.size() != n) {
        std::ostringstream os;
        os << "transport: metric on " << n << " states, marginals of size " << mu.size()
           << " and " << nu.size();
        throw Error(ErrorKind::dimension_mismatch, os.str());
    }
}

// Transportation LP over a raw cost matrix (not necessarily a pseudometric):
// variables w(x,y) >= 0 row-major, n supply rows, n-1 demand rows (the last
// demand constraint is implied because both marginals have total mass 1).
std::pair<Scalar, Mat> primal_lp(const Mat& cost, const Dist& mu, const Dist& nu) {
    const Eigen::Index n = cost.rows();
    const Eigen::Index nvars = n * n;
    const Eigen::Index nrows = 2 * n - 1;
    Mat A = Mat::Zero(nrows, nvars);
    Vec b(nrows);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) A(x, x * n + y) = 1.0;
        b(x) = mu(x);
    }
    for (Eigen::Index y = 0; y + 1 < n; ++y) {
        for (Eigen::Index x = 0; x < n; ++x) A(n + y, x * n + y) = 1.0;
        b(n + y) = nu(y);
    }
    Vec c(nvars);
    for (Eigen::Index x = 0; x < n; ++x) {
        c.segment(x * n, n) = cost.row(x).transpose();
    }

    lp::LpSolution sol = lp::solve(A, b, c);

    Mat w(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        w.row(x) = sol.x.segment(x * n, n).transpose();
    }
    const Vec row_res = (w.rowwise().sum() - mu.probs()).cwiseAbs();
    const Vec col_res = (w.colwise().sum().transpose() - nu.probs()).cwiseAbs();
    if (row_res.maxCoeff() > TransportSolution::marginal_tol ||
        col_res.maxCoeff() > TransportSolution::marginal_tol) {
        throw Error(ErrorKind::solver_failure,
                    "transport: solved coupling violates its marginals");
    }
    const Scalar value = (w.array() * cost.array()).sum();
    return {value, std::move(w)};
}

}  // namespace

Scalar expectation(const Eigen::Ref<const Vec>& p, const Dist& mu) {
    if (p.size() != mu.size()) {
        std::ostringstream os;
        os << "expectation: predicate of size " << p.size() << " against distribution of size "
           << mu.size();
        throw Error(ErrorKind::dimension_mismatch, os.str());
    }
    return mu.probs().dot(p);
}

TransportSolution wasserstein_primal(const PMetric& d, const Dist& mu, const Dist& nu) {
    check_sizes(d.size(), mu, nu);
    auto [value, coupling] = primal_lp(d.values(), mu, nu);
    TransportSolution out;
    out.value = value;
    out.coupling = std::move(coupling);
    return out;
}

TransportSolution wasserstein_dual(const PMetric& d, const Dist& mu, const Dist& nu) {
    const Eigen::Index n = d.size();
    check_sizes(n, mu, nu);

    // Variables: h (n), one slack per ordered pair x != y (shortness), one
    // slack per state (h <= 1). The slacks form a feasible starting basis
    // because h = 0 is feasible for any nonnegative cost.
    const Eigen::Index npairs = n * (n - 1);
    const Eigen::Index nrows = npairs + n;
    const Eigen::Index nvars = n + npairs + n;
    Mat A = Mat::Zero(nrows, nvars);
    Vec b(nrows);
    Eigen::Index row = 0;
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            if (x == y) continue;
            A(row, x) = 1.0;
            A(row, y) = -1.0;
            A(row, n + row) = 1.0;
            b(row) = d(x, y);
            ++row;
        }
    }
    for (Eigen::Index x = 0; x < n; ++x) {
        A(row, x) = 1.0;
        A(row, n + row) = 1.0;
        b(row) = 1.0;
        ++row;
    }
    Vec c = Vec::Zero(nvars);
    c.head(n) = nu.probs() - mu.probs();  // minimize the negated objective

    std::vector<Eigen::Index> basis(nrows);
    for (Eigen::Index i = 0; i < nrows; ++i) basis[i] = n + i;
    lp::LpSolution sol = lp::solve_with_basis(A, b, c, std::move(basis));

    Vec h = sol.x.head(n).cwiseMax(0.0).cwiseMin(1.0);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            if (h(x) - h(y) > d(x, y) + TransportSolution::shortness_tol) {
                throw Error(ErrorKind::solver_failure,
                            "transport: dual potential violates shortness");
            }
        }
    }
    TransportSolution out;
    out.value = (mu.probs() - nu.probs()).dot(h);
    out.potential = std::move(h);
    return out;
}

Scalar duality_gap(const PMetric& d, const Dist& mu, const Dist& nu) {
    return std::abs(wasserstein_primal(d, mu, nu).value - wasserstein_dual(d, mu, nu).value);
}

TransportSolution solve_transport(const PMetric& d, const Dist& mu, const Dist& nu) {
    TransportSolution primal = wasserstein_primal(d, mu, nu);
    TransportSolution dual = wasserstein_dual(d, mu, nu);
    TransportSolution out;
    out.value = primal.value;
    out.coupling = std::move(primal.coupling);
    out.potential = std::move(dual.potential);
    out.gap = std::abs(primal.value - dual.value);
    return out;
}

Scalar wasserstein_p(const PMetric& d, const Dist& mu, const Dist& nu, Scalar p) {
    if (!(p >= 1.0)) {
        std::ostringstream os;
        os << "wasserstein_p: exponent " << p << " must be at least 1";
        throw Error(ErrorKind::invalid_exponent, os.str());
    }
    check_sizes(d.size(), mu, nu);
    if (p == 1.0) return primal_lp(d.values(), mu, nu).first;
    const Mat cost = d.values().array().pow(p).matrix();
    const Scalar value = primal_lp(cost, mu, nu).first;
    return std::pow(value, 1.0 / p);
}

}  // namespace bisimet
