#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bisimet/errors.hpp"

namespace bisimet {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense index of a state in a model's state table.
using StateId = Eigen::Index;

/// An action together with its position in the model's action table.
struct ActionId {
    Eigen::Index index;
    std::string label;
};

/// A state predicate: one value in [0,1] per state.
using Predicate = Vec;

/**
 * Probability distribution over the states of a model.
 *
 * Entries are nonnegative and sum to 1 within `sum_tol` of 1; construction
 * rejects anything else. The stored vector is renormalized so downstream
 * arithmetic sees a sum within a few ulps of 1.
 */
class Dist {
  public:
    static constexpr Scalar sum_tol = 1e-9;

    explicit Dist(Vec p);

    const Vec& probs() const noexcept { return p_; }
    Scalar operator()(StateId x) const { return p_(x); }
    Eigen::Index size() const noexcept { return p_.size(); }

    bool operator==(const Dist& other) const { return p_ == other.p_; }

  private:
    Vec p_;
};

/// Point mass at state `x` in a space of `n_states` states.
Dist dirac(StateId x, Eigen::Index n_states);

/**
 * Finite-state Markov decision process with rewards in [0,1].
 *
 * Every (action, state) pair carries a transition distribution and a reward.
 * A reward process (no external choice) is the single-action special case;
 * see `make_mrp`.
 */
class Mdp {
  public:
    struct Arm {
        std::string label;
        std::vector<Dist> rows;
        Vec rewards;
    };

    Mdp(std::vector<std::string> state_names, std::vector<Arm> arms);

    Eigen::Index n_states() const noexcept {
        return static_cast<Eigen::Index>(state_names_.size());
    }
    Eigen::Index n_actions() const noexcept {
        return static_cast<Eigen::Index>(arms_.size());
    }

    const std::string& state_name(StateId x) const { return state_names_.at(x); }
    const std::vector<std::string>& state_names() const noexcept { return state_names_; }

    const std::string& action_label(Eigen::Index a) const { return arms_.at(a).label; }
    ActionId action_id(Eigen::Index a) const { return {a, arms_.at(a).label}; }

    /// Index of the action with the given label; throws `unknown_action`.
    Eigen::Index action_index(const std::string& label) const;

    const Dist& kernel(Eigen::Index a, StateId x) const { return arms_.at(a).rows.at(x); }
    Scalar reward(Eigen::Index a, StateId x) const { return arms_.at(a).rewards(x); }
    const Vec& rewards(Eigen::Index a) const { return arms_.at(a).rewards; }

    /// Validates an ActionId against this model's action table.
    void check_action(const ActionId& a) const;

  private:
    std::vector<std::string> state_names_;
    std::vector<Arm> arms_;
};

/// Reward process over the given kernel: an Mdp with the single action "τ".
Mdp make_mrp(std::vector<std::string> state_names, std::vector<Dist> rows, Vec rewards);

/**
 * 1-bounded pseudometric on a model's states.
 *
 * Values lie in [0,1]; the diagonal is zero, the matrix is symmetric, and
 * the triangle inequality holds, all within `axiom_tol`. Use
 * `validate_pmetric` to check an arbitrary matrix; `PMetric::unchecked` is
 * for matrices that are correct by construction.
 */
class PMetric {
  public:
    static constexpr Scalar axiom_tol = 1e-9;

    /// Wraps a matrix the caller guarantees to satisfy the axioms.
    static PMetric unchecked(Mat d) { return PMetric(std::move(d)); }

    const Mat& values() const noexcept { return d_; }
    Scalar operator()(StateId x, StateId y) const { return d_(x, y); }
    Eigen::Index size() const noexcept { return d_.rows(); }

  private:
    explicit PMetric(Mat d) : d_(std::move(d)) {}
    Mat d_;
};

/**
 * Checks the pseudometric axioms on `d` within `PMetric::axiom_tol`.
 *
 * Throws `not_reflexive`, `not_symmetric`, or `triangle_violation`, naming a
 * witnessing state pair or triple, and `validation` when an entry leaves
 * [0,1]. Returns the wrapped matrix on success.
 */
PMetric validate_pmetric(const Mat& d);

/// Zero pseudometric on `n` states.
PMetric zero_pmetric(Eigen::Index n);

/// Discrete pseudometric: d(x,y) = 1 for x != y.
PMetric discrete_pmetric(Eigen::Index n);

}  // namespace bisimet
