#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bisimet/metric.hpp"
#include "bisimet/model.hpp"

namespace bisimet {

/// Connectives of the base language L (top block) and the three extensions
/// that make up L'. Scale and Cx belong to L but are not part of the default
/// enumeration signature.
enum class FormulaOp {
    top,
    not_,
    and_,
    dia,      // discounted next-step modality
    add_c,    // truncated addition of a constant
    sub_c,    // truncated subtraction of a constant
    scale,    // multiplication by a constant
    cx,       // convex combination of two formulas

    rew,      // L' only: the reward of an action
    dia_prime,// L' only: transport part of the modality, reward dropped
    plus,     // L' only: truncated addition of two formulas
};

enum class Language { l, l_prime };

/**
 * Immutable formula of the quantitative modal logic.
 *
 * Handles share subterms, so large derived formulas stay compact in memory.
 * Scalars are validated into [0,1] on construction; action references carry
 * both index and label and are checked against the model at evaluation time.
 * The language tag is derived: a formula is in L' iff it contains an
 * L'-only connective.
 */
class Formula {
  public:
    struct Node {
        FormulaOp op;
        Scalar scalar = 0.0;
        ActionId action{-1, ""};
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
        Language lang = Language::l;
        int depth = 0;
    };

    static Formula top();
    static Formula not_(const Formula& f);
    static Formula and_(const Formula& a, const Formula& b);
    /// De Morgan sugar: or(a,b) = not(and(not(a), not(b))).
    static Formula or_(const Formula& a, const Formula& b);
    static Formula dia(ActionId a, const Formula& f);
    static Formula add(const Formula& f, Scalar r);
    static Formula sub(const Formula& f, Scalar r);
    static Formula scale(Scalar r, const Formula& f);
    static Formula cx(Scalar r, const Formula& a, const Formula& b);
    static Formula rew(ActionId a);
    static Formula dia_prime(ActionId a, const Formula& f);
    static Formula plus(const Formula& a, const Formula& b);

    FormulaOp op() const { return node_->op; }
    Scalar scalar() const { return node_->scalar; }
    const ActionId& action() const { return node_->action; }
    Formula lhs() const { return Formula(node_->lhs); }
    Formula rhs() const { return Formula(node_->rhs); }
    Language language() const { return node_->lang; }
    int depth() const { return node_->depth; }

    /// Canonical text form; `parse_formula` inverts it.
    std::string str() const;

    const Node* raw() const { return node_.get(); }
    std::shared_ptr<const Node> shared() const { return node_; }

  private:
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/**
 * Parses the concrete syntax
 *
 *   phi := "T" | "not(" phi ")" | "and(" phi "," phi ")" | "or(" phi "," phi ")"
 *        | "dia(" ident "," phi ")" | "add(" phi "," num ")" | "sub(" phi "," num ")"
 *        | "scale(" num "," phi ")" | "cc(" num "," phi "," phi ")"
 *        | "rew(" ident ")" | "diap(" ident "," phi ")" | "plus(" phi "," phi ")"
 *
 * with insignificant whitespace. `or` is sugar for the De Morgan expansion.
 * Action identifiers are resolved against `m` (`unknown_action`); scalars
 * must lie in [0,1] (`scalar_out_of_range`); anything else raises a
 * `SyntaxError` carrying the byte position.
 */
Formula parse_formula(const std::string& text, const Mdp& m);

/**
 * Evaluates formulas over a fixed model and discount, caching one value
 * vector per distinct subterm, so shared structure is evaluated once.
 * Cached entries pin their nodes alive; the cache is only dropped with the
 * evaluator itself.
 */
class Evaluator {
  public:
    Evaluator(const Mdp& m, DiscountConfig c) : m_(&m), c_(c) {}

    const Vec& eval(const Formula& f);

    const Mdp& model() const { return *m_; }
    DiscountConfig discount() const { return c_; }

  private:
    const Mdp* m_;
    DiscountConfig c_;
    struct CacheEntry {
        std::shared_ptr<const Formula::Node> pin;
        Vec value;
    };
    std::unordered_map<const Formula::Node*, CacheEntry> cache_;
};

/// Value vector of `f` on `m`: one entry per state, always inside [0,1].
Vec eval_formula(const Formula& f, const Mdp& m, DiscountConfig c);

/// Entrywise supremum of |value(x) - value(y)| over the given formulas;
/// a pseudometric lower bound on the fixpoint metric. Empty input raises
/// `empty_formula_set`.
PMetric logical_distance(const std::vector<Formula>& formulas, const Mdp& m, DiscountConfig c);

/// Scalar constants offered to add/sub during enumeration when the caller
/// has no preference.
const std::vector<Scalar>& default_scalar_grid();

/**
 * All formulas over the default signature (T, not, and, dia, add, sub) of
 * AST depth at most `depth`, with add/sub constants drawn from
 * `scalar_grid`, deduplicated by value vector: two formulas whose vectors
 * agree after rounding to 1e-12 keep only the first representative.
 * Deduplication is sound for every downstream consumer because the
 * semantics is compositional in the value vectors. Output order is
 * deterministic. Counts grow quickly with depth; callers own the budget.
 */
std::vector<Formula> enumerate_formulas(const Mdp& m, DiscountConfig c, int depth,
                                        const std::vector<Scalar>& scalar_grid);

/// Result of budget-capped enumeration: every fully completed depth band,
/// plus the depth those bands reach.
struct BudgetedFormulas {
    std::vector<Formula> formulas;
    int completed_depth = 0;
};

/**
 * Like `enumerate_formulas`, but stops early, always at a band boundary, when
 * the pool holds at least `max_pool` formulas or when the next band would
 * examine more than 500 * max_pool candidate combinations (which bounds both
 * memory and time). The output therefore always equals
 * `enumerate_formulas(m, c, completed_depth, scalar_grid)`; with an ample
 * budget `completed_depth == depth`.
 */
BudgetedFormulas enumerate_formulas_budgeted(const Mdp& m, DiscountConfig c, int depth,
                                             const std::vector<Scalar>& scalar_grid,
                                             std::size_t max_pool);

/**
 * Builds a formula psi with eval(psi)(y) = h(y) exactly and
 * h(x) - eval(psi)(x) in [0, eps), given a witness formula phi whose value
 * gap at (x,y) nearly dominates h's: eval(phi)(x) - eval(phi)(y) >
 * h(x) - h(y) - eps. Requires h(x) >= h(y); violations of either hypothesis
 * raise `hypothesis_violated`.
 *
 * The shape is add(and(sub(phi, eval(phi)(y)), sub(T, 1-r)), h(y)) with
 * r = h(x) - h(y); the inner constant is nudged down by single ulps until
 * the evaluated value at x does not overshoot h(x), which keeps the
 * one-sided error guarantee exact in floating point.
 */
Formula approximate_at_pair(const Predicate& h, StateId x, StateId y, const Formula& witness,
                            Scalar eps, const Mdp& m, DiscountConfig c);

/// Witness formulas per ordered state pair, keyed (from, to).
using PairWitnessMap = std::map<std::pair<StateId, StateId>, Formula>;

/**
 * Uniform approximation of a predicate from pairwise approximants: the
 * lattice combination max over u of min over v of psi_{u,v}, where psi_{u,v}
 * comes from `approximate_at_pair` at the orientation with the larger h
 * value first. The result g satisfies h(z) - eval(g)(z) in [0, eps) at every
 * state, up to a few units in the last place on either side: the outer
 * disjunctions evaluate through double negation, and each 1 - t rounds.
 * `pair_witnesses` must contain an entry for every ordered pair
 * (u,v), u != v, with h(u) >= h(v) (`missing_witness` otherwise); diagonal
 * pairs fall back to the trivial witness T.
 */
Formula lattice_approximate(const Predicate& h, Scalar eps, const PairWitnessMap& pair_witnesses,
                            const Mdp& m, DiscountConfig c);

/// Formulas realizing the fixpoint metric from below, together with the
/// realized gaps: achieved(x,y) = max over the set of value(x) - value(y).
/// The set is closed under negation, so `achieved` is symmetric.
struct WitnessSet {
    std::vector<Formula> formulas;
    Mat achieved;
};

/**
 * Constructive lower-bound witnesses for the fixpoint metric, level by
 * level: level 0 is {T}; a level n+1 witness for a pair wraps a lattice
 * approximation of an optimal dual potential (solved against the level-n
 * iterate, for the action maximizing the one-step distance, reward-dominant
 * state first) in that action's modality. After `depth` levels the realized
 * gap for each pair is at least the depth-th iterate minus
 * delta(depth, eps), where delta(0) = 0 and delta(n+1) = c*(delta(n)+eps).
 */
WitnessSet expressivity_witnesses(const Mdp& m, DiscountConfig c, int depth, Scalar eps);

}  // namespace bisimet
