#include "bisimet/simplex.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bisimet::lp {

namespace {

constexpr Scalar pivot_eps = 1e-11;   // smallest pivot magnitude accepted
constexpr Scalar cost_eps = 1e-11;    // reduced costs above -cost_eps count as optimal
constexpr Scalar phase1_tol = 1e-8;   // Phase I objective above this means infeasible

// Dense simplex tableau: `t` holds B^{-1}[A | b]; `cost` the reduced costs
// and `obj` the negated objective of the current basis.
struct Tableau {
    Mat t;                            // m x (ncols + 1)
    Vec cost;                         // ncols
    Scalar obj = 0;
    std::vector<Eigen::Index> basis;  // m entries, column index per row
    std::vector<char> is_basic;       // ncols flags
    int pivots = 0;

    Eigen::Index rows() const { return t.rows(); }
    Eigen::Index cols() const { return t.cols() - 1; }
    Scalar rhs(Eigen::Index i) const { return t(i, t.cols() - 1); }

    void pivot(Eigen::Index r, Eigen::Index j) {
        t.row(r) /= t(r, j);
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (i == r) continue;
            const Scalar factor = t(i, j);
            if (factor != 0.0) t.row(i) -= factor * t.row(r);
        }
        const Scalar cfactor = cost(j);
        if (cfactor != 0.0) {
            cost -= cfactor * t.row(r).head(cols()).transpose();
            obj -= cfactor * rhs(r);
        }
        cost(j) = 0.0;
        is_basic[basis[r]] = 0;
        is_basic[j] = 1;
        basis[r] = j;
        ++pivots;
    }
};

[[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorKind::solver_failure, "simplex: " + what);
}

// Runs simplex iterations on a tableau whose basis is already feasible.
void iterate(Tableau& tab, int max_pivots) {
    const Eigen::Index m = tab.rows();
    const Eigen::Index ncols = tab.cols();
    while (true) {
        // Bland: the lowest-index column with a negative reduced cost enters.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < ncols; ++j) {
            if (!tab.is_basic[j] && tab.cost(j) < -cost_eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return;

        Eigen::Index leave = -1;
        Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            const Scalar a = tab.t(i, enter);
            if (a <= pivot_eps) continue;
            const Scalar ratio = tab.rhs(i) / a;
            // Bland tie-break: among minimal ratios keep the lowest basic index.
            if (ratio < best_ratio - 1e-15 ||
                (ratio <= best_ratio + 1e-15 && (leave < 0 || tab.basis[i] < tab.basis[leave]))) {
                if (ratio < best_ratio) best_ratio = ratio;
                leave = i;
            }
        }
        if (leave < 0) fail("unbounded program");
        tab.pivot(leave, enter);
        if (tab.pivots > max_pivots) {
            std::ostringstream os;
            os << "pivot budget exhausted after " << tab.pivots << " pivots";
            fail(os.str());
        }
    }
}

// Rebuilds the reduced-cost row for objective `c` against the current basis.
void install_cost(Tableau& tab, const Vec& c) {
    const Eigen::Index ncols = tab.cols();
    tab.cost = Vec::Zero(ncols);
    tab.cost.head(c.size()) = c;
    tab.obj = 0.0;
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
        const Eigen::Index bj = tab.basis[i];
        const Scalar cb = bj < c.size() ? c(bj) : 0.0;
        if (cb != 0.0) {
            tab.cost -= cb * tab.t.row(i).head(ncols).transpose();
            tab.obj -= cb * tab.rhs(i);
        }
    }
    for (Eigen::Index i = 0; i < tab.rows(); ++i) tab.cost(tab.basis[i]) = 0.0;
}

LpSolution extract(const Tableau& tab, const Vec& c) {
    Vec x = Vec::Zero(c.size());
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
        if (tab.basis[i] < c.size()) {
            Scalar v = tab.rhs(i);
            if (v < 0.0) {
                if (v < -1e-8) fail("negative basic value in solution");
                v = 0.0;
            }
            x(tab.basis[i]) = v;
        }
    }
    return {c.dot(x), std::move(x), tab.pivots};
}

int pivot_budget(Eigen::Index m, Eigen::Index n) {
    return 20000 + 60 * static_cast<int>(m + n);
}

}  // namespace

LpSolution solve(const Mat& A, const Vec& b, const Vec& c) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    if (b.size() != m || c.size() != n) {
        throw Error(ErrorKind::dimension_mismatch, "simplex: inconsistent program dimensions");
    }

    // Phase I: artificial variables form the starting basis; rows are flipped
    // so the right-hand side is nonnegative.
    Tableau tab;
    tab.t.resize(m, n + m + 1);
    tab.t.block(0, 0, m, n) = A;
    tab.t.block(0, n, m, m) = Mat::Identity(m, m);
    tab.t.col(n + m) = b;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < 0.0) tab.t.row(i) = -tab.t.row(i);
        tab.t(i, n + i) = 1.0;
    }
    tab.basis.resize(m);
    tab.is_basic.assign(n + m, 0);
    for (Eigen::Index i = 0; i < m; ++i) {
        tab.basis[i] = n + i;
        tab.is_basic[n + i] = 1;
    }
    Vec phase1_cost = Vec::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    install_cost(tab, phase1_cost);
    const int budget = pivot_budget(m, n);
    iterate(tab, budget);
    if (-tab.obj > phase1_tol) fail("infeasible program");

    // Drive remaining artificials out of the basis; rows where no original
    // column can pivot are redundant and get dropped.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.basis[i] < n) {
            keep.push_back(i);
            continue;
        }
        Eigen::Index j = -1;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!tab.is_basic[k] && std::abs(tab.t(i, k)) > pivot_eps) {
                j = k;
                break;
            }
        }
        if (j >= 0) {
            tab.pivot(i, j);
            keep.push_back(i);
        }
    }
    if (static_cast<Eigen::Index>(keep.size()) < m) {
        Mat reduced(static_cast<Eigen::Index>(keep.size()), tab.t.cols());
        std::vector<Eigen::Index> basis;
        for (std::size_t r = 0; r < keep.size(); ++r) {
            reduced.row(static_cast<Eigen::Index>(r)) = tab.t.row(keep[r]);
            basis.push_back(tab.basis[keep[r]]);
        }
        tab.t = std::move(reduced);
        tab.basis = std::move(basis);
    }

    // Phase II on the original columns only.
    Mat phase2(tab.t.rows(), n + 1);
    phase2.block(0, 0, tab.t.rows(), n) = tab.t.block(0, 0, tab.t.rows(), n);
    phase2.col(n) = tab.t.col(tab.t.cols() - 1);
    tab.t = std::move(phase2);
    tab.is_basic.assign(n, 0);
    for (Eigen::Index i = 0; i < tab.t.rows(); ++i) tab.is_basic[tab.basis[i]] = 1;
    install_cost(tab, c);
    iterate(tab, budget);
    return extract(tab, c);
}

LpSolution solve_with_basis(const Mat& A, const Vec& b, const Vec& c,
                            std::vector<Eigen::Index> basis) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    if (b.size() != m || c.size() != n || static_cast<Eigen::Index>(basis.size()) != m) {
        throw Error(ErrorKind::dimension_mismatch, "simplex: inconsistent program dimensions");
    }
    Tableau tab;
    tab.t.resize(m, n + 1);
    tab.t.block(0, 0, m, n) = A;
    tab.t.col(n) = b;
    tab.basis = std::move(basis);
    tab.is_basic.assign(n, 0);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.basis[i] < 0 || tab.basis[i] >= n) fail("basis index out of range");
        tab.is_basic[tab.basis[i]] = 1;
    }
    // Gauss-Jordan elimination turns the supplied basis into the identity.
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index j = tab.basis[i];
        if (std::abs(tab.t(i, j)) <= pivot_eps) fail("supplied basis is singular");
        tab.t.row(i) /= tab.t(i, j);
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k == i) continue;
            const Scalar factor = tab.t(k, j);
            if (factor != 0.0) tab.t.row(k) -= factor * tab.t.row(i);
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.rhs(i) < -1e-9) fail("supplied basis is infeasible");
    }
    install_cost(tab, c);
    iterate(tab, pivot_budget(m, n));
    return extract(tab, c);
}

}  // namespace bisimet::lp
