#include "bisimet/model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace bisimet {

Dist::Dist(Vec p) : p_(std::move(p)) {
    if (p_.size() == 0) {
        throw Error(ErrorKind::validation, "distribution must have at least one entry");
    }
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
        const Scalar v = p_(i);
        if (!(v >= 0.0 && v <= 1.0)) {
            std::ostringstream os;
            os << "distribution entry " << i << " = " << v << " outside [0,1]";
            throw Error(ErrorKind::validation, os.str());
        }
    }
    const Scalar total = p_.sum();
    if (std::abs(total - 1.0) > sum_tol) {
        std::ostringstream os;
        os << "distribution sums to " << total << ", more than " << sum_tol << " away from 1";
        throw Error(ErrorKind::validation, os.str());
    }
    p_ /= total;
}

Dist dirac(StateId x, Eigen::Index n_states) {
    if (x < 0 || x >= n_states) {
        std::ostringstream os;
        os << "dirac state " << x << " out of range for " << n_states << " states";
        throw Error(ErrorKind::index_out_of_range, os.str());
    }
    Vec p = Vec::Zero(n_states);
    p(x) = 1.0;
    return Dist(std::move(p));
}

Mdp::Mdp(std::vector<std::string> state_names, std::vector<Arm> arms)
    : state_names_(std::move(state_names)), arms_(std::move(arms)) {
    const auto n = static_cast<Eigen::Index>(state_names_.size());
    if (n == 0) {
        throw Error(ErrorKind::validation, "model must have at least one state");
    }
    if (arms_.empty()) {
        throw Error(ErrorKind::validation, "model must have at least one action");
    }
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        const Arm& arm = arms_[a];
        if (arm.label.empty()) {
            std::ostringstream os;
            os << "action " << a << " has an empty label";
            throw Error(ErrorKind::validation, os.str());
        }
        if (static_cast<Eigen::Index>(arm.rows.size()) != n) {
            std::ostringstream os;
            os << "action " << arm.label << " has " << arm.rows.size()
               << " transition rows, expected " << n;
            throw Error(ErrorKind::dimension_mismatch, os.str());
        }
        if (arm.rewards.size() != n) {
            std::ostringstream os;
            os << "action " << arm.label << " has " << arm.rewards.size()
               << " rewards, expected " << n;
            throw Error(ErrorKind::dimension_mismatch, os.str());
        }
        for (Eigen::Index x = 0; x < n; ++x) {
            if (arm.rows[x].size() != n) {
                std::ostringstream os;
                os << "transition row for action " << arm.label << ", state " << x
                   << " has length " << arm.rows[x].size() << ", expected " << n;
                throw Error(ErrorKind::dimension_mismatch, os.str());
            }
            const Scalar r = arm.rewards(x);
            if (!(r >= 0.0 && r <= 1.0)) {
                std::ostringstream os;
                os << "reward for action " << arm.label << ", state " << x << " = " << r
                   << " outside [0,1]";
                throw Error(ErrorKind::validation, os.str());
            }
        }
    }
}

Eigen::Index Mdp::action_index(const std::string& label) const {
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        if (arms_[a].label == label) return static_cast<Eigen::Index>(a);
    }
    throw Error(ErrorKind::unknown_action, "unknown action: " + label);
}

void Mdp::check_action(const ActionId& a) const {
    if (a.index < 0 || a.index >= n_actions()) {
        std::ostringstream os;
        os << "action index " << a.index << " out of range for " << n_actions() << " actions";
        throw Error(ErrorKind::index_out_of_range, os.str());
    }
    if (arms_[a.index].label != a.label) {
        std::ostringstream os;
        os << "action label " << a.label << " does not match action " << a.index << " ("
           << arms_[a.index].label << ")";
        throw Error(ErrorKind::unknown_action, os.str());
    }
}

Mdp make_mrp(std::vector<std::string> state_names, std::vector<Dist> rows, Vec rewards) {
    Mdp::Arm arm{"τ", std::move(rows), std::move(rewards)};
    std::vector<Mdp::Arm> arms;
    arms.push_back(std::move(arm));
    return Mdp(std::move(state_names), std::move(arms));
}

PMetric validate_pmetric(const Mat& d) {
    const Eigen::Index n = d.rows();
    if (d.cols() != n) {
        std::ostringstream os;
        os << "metric matrix is " << d.rows() << "x" << d.cols() << ", expected square";
        throw Error(ErrorKind::dimension_mismatch, os.str());
    }
    const Scalar tol = PMetric::axiom_tol;
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            const Scalar v = d(x, y);
            if (!(v >= -tol && v <= 1.0 + tol)) {
                std::ostringstream os;
                os << "metric entry (" << x << "," << y << ") = " << v << " outside [0,1]";
                throw Error(ErrorKind::validation, os.str());
            }
        }
    }
    for (Eigen::Index x = 0; x < n; ++x) {
        if (std::abs(d(x, x)) > tol) {
            std::ostringstream os;
            os << "d(" << x << "," << x << ") = " << d(x, x) << " violates reflexivity";
            throw Error(ErrorKind::not_reflexive, os.str());
        }
    }
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = x + 1; y < n; ++y) {
            if (std::abs(d(x, y) - d(y, x)) > tol) {
                std::ostringstream os;
                os << "d(" << x << "," << y << ") = " << d(x, y) << " but d(" << y << "," << x
                   << ") = " << d(y, x);
                throw Error(ErrorKind::not_symmetric, os.str());
            }
        }
    }
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index z = 0; z < n; ++z) {
            for (Eigen::Index y = 0; y < n; ++y) {
                if (d(x, z) > d(x, y) + d(y, z) + tol) {
                    std::ostringstream os;
                    os << "d(" << x << "," << z << ") = " << d(x, z) << " exceeds d(" << x << ","
                       << y << ") + d(" << y << "," << z << ") = " << d(x, y) + d(y, z);
                    throw Error(ErrorKind::triangle_violation, os.str());
                }
            }
        }
    }
    return PMetric::unchecked(d);
}

PMetric zero_pmetric(Eigen::Index n) { return PMetric::unchecked(Mat::Zero(n, n)); }

PMetric discrete_pmetric(Eigen::Index n) {
    Mat d = Mat::Ones(n, n) - Mat::Identity(n, n);
    return PMetric::unchecked(std::move(d));
}

}  // namespace bisimet
