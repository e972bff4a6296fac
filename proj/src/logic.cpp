#include "bisimet/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "bisimet/transport.hpp"

namespace bisimet {

namespace {

using NodePtr = std::shared_ptr<const Formula::Node>;

Scalar checked_scalar(Scalar r, const char* where) {
    if (!(r >= 0.0 && r <= 1.0)) {
        std::ostringstream os;
        os << where << ": scalar " << r << " outside [0,1]";
        throw Error(ErrorKind::scalar_out_of_range, os.str());
    }
    return r;
}

Language join(Language a, Language b) {
    return (a == Language::l_prime || b == Language::l_prime) ? Language::l_prime : Language::l;
}

}  // namespace

Formula Formula::top() {
    static const Formula t{std::make_shared<const Node>(Node{FormulaOp::top, 0.0, {-1, ""},
                                                             nullptr, nullptr, Language::l, 0})};
    return t;
}

Formula Formula::not_(const Formula& f) {
    return Formula(std::make_shared<const Node>(Node{FormulaOp::not_, 0.0, {-1, ""}, f.node_,
                                                     nullptr, f.language(), f.depth() + 1}));
}

Formula Formula::and_(const Formula& a, const Formula& b) {
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::and_, 0.0, {-1, ""}, a.node_, b.node_, join(a.language(), b.language()),
             1 + std::max(a.depth(), b.depth())}));
}

Formula Formula::or_(const Formula& a, const Formula& b) {
    return not_(and_(not_(a), not_(b)));
}

Formula Formula::dia(ActionId a, const Formula& f) {
    return Formula(std::make_shared<const Node>(Node{FormulaOp::dia, 0.0, std::move(a), f.node_,
                                                     nullptr, f.language(), f.depth() + 1}));
}

Formula Formula::add(const Formula& f, Scalar r) {
    checked_scalar(r, "add");
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::add_c, r, {-1, ""}, f.node_, nullptr, f.language(), f.depth() + 1}));
}

Formula Formula::sub(const Formula& f, Scalar r) {
    checked_scalar(r, "sub");
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::sub_c, r, {-1, ""}, f.node_, nullptr, f.language(), f.depth() + 1}));
}

Formula Formula::scale(Scalar r, const Formula& f) {
    checked_scalar(r, "scale");
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::scale, r, {-1, ""}, f.node_, nullptr, f.language(), f.depth() + 1}));
}

Formula Formula::cx(Scalar r, const Formula& a, const Formula& b) {
    checked_scalar(r, "cc");
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::cx, r, {-1, ""}, a.node_, b.node_, join(a.language(), b.language()),
             1 + std::max(a.depth(), b.depth())}));
}

Formula Formula::rew(ActionId a) {
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::rew, 0.0, std::move(a), nullptr, nullptr, Language::l_prime, 0}));
}

Formula Formula::dia_prime(ActionId a, const Formula& f) {
    return Formula(std::make_shared<const Node>(Node{FormulaOp::dia_prime, 0.0, std::move(a),
                                                     f.node_, nullptr, Language::l_prime,
                                                     f.depth() + 1}));
}

Formula Formula::plus(const Formula& a, const Formula& b) {
    return Formula(std::make_shared<const Node>(
        Node{FormulaOp::plus, 0.0, {-1, ""}, a.node_, b.node_, Language::l_prime,
             1 + std::max(a.depth(), b.depth())}));
}

namespace {

// Shortest decimal rendering that round-trips, so printed formulas parse
// back to bit-identical scalars.
std::string format_scalar(Scalar v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void print_node(const Formula::Node* n, std::string& out) {
    switch (n->op) {
        case FormulaOp::top:
            out += "T";
            return;
        case FormulaOp::not_:
            out += "not(";
            print_node(n->lhs.get(), out);
            out += ")";
            return;
        case FormulaOp::and_:
            out += "and(";
            print_node(n->lhs.get(), out);
            out += ", ";
            print_node(n->rhs.get(), out);
            out += ")";
            return;
        case FormulaOp::dia:
            out += "dia(" + n->action.label + ", ";
            print_node(n->lhs.get(), out);
            out += ")";
            return;
        case FormulaOp::add_c:
            out += "add(";
            print_node(n->lhs.get(), out);
            out += ", " + format_scalar(n->scalar) + ")";
            return;
        case FormulaOp::sub_c:
            out += "sub(";
            print_node(n->lhs.get(), out);
            out += ", " + format_scalar(n->scalar) + ")";
            return;
        case FormulaOp::scale:
            out += "scale(" + format_scalar(n->scalar) + ", ";
            print_node(n->lhs.get(), out);
            out += ")";
            return;
        case FormulaOp::cx:
            out += "cc(" + format_scalar(n->scalar) + ", ";
            print_node(n->lhs.get(), out);
            out += ", ";
            print_node(n->rhs.get(), out);
            out += ")";
            return;
        case FormulaOp::rew:
            out += "rew(" + n->action.label + ")";
            return;
        case FormulaOp::dia_prime:
            out += "diap(" + n->action.label + ", ";
            print_node(n->lhs.get(), out);
            out += ")";
            return;
        case FormulaOp::plus:
            out += "plus(";
            print_node(n->lhs.get(), out);
            out += ", ";
            print_node(n->rhs.get(), out);
            out += ")";
            return;
    }
}

}  // namespace

std::string Formula::str() const {
    std::string out;
    print_node(node_.get(), out);
    return out;
}

namespace {

// Recursive-descent parser over the canonical grammar. Positions are byte
// offsets into the input.
class Parser {
  public:
    Parser(const std::string& text, const Mdp& m) : text_(text), m_(m) {}

    Formula run() {
        Formula f = formula();
        skip_ws();
        if (pos_ != text_.size()) {
            throw SyntaxError(pos_, at() + "unexpected trailing input");
        }
        return f;
    }

  private:
    std::string at() const {
        std::ostringstream os;
        os << "formula syntax error at position " << pos_ << ": ";
        return os.str();
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    void expect(char ch) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ch) {
            throw SyntaxError(pos_, at() + "expected '" + std::string(1, ch) + "'");
        }
        ++pos_;
    }

    bool is_delim(char ch) const {
        return ch == '(' || ch == ')' || ch == ',' ||
               std::isspace(static_cast<unsigned char>(ch));
    }

    std::string token() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_delim(text_[pos_])) ++pos_;
        if (pos_ == start) throw SyntaxError(start, at() + "expected an identifier");
        return text_.substr(start, pos_ - start);
    }

    ActionId action() {
        skip_ws();
        std::size_t start = pos_;
        std::string label = token();
        try {
            return {m_.action_index(label), label};
        } catch (const Error&) {
            std::ostringstream os;
            os << "unknown action \"" << label << "\" at position " << start;
            throw Error(ErrorKind::unknown_action, os.str());
        }
    }

    Scalar number() {
        skip_ws();
        std::size_t start = pos_;
        std::string tok = token();
        const char* begin = tok.c_str();
        char* end = nullptr;
        Scalar v = std::strtod(begin, &end);
        if (end != begin + tok.size()) {
            throw SyntaxError(start, at() + "expected a number, got \"" + tok + "\"");
        }
        if (!(v >= 0.0 && v <= 1.0)) {
            std::ostringstream os;
            os << "scalar " << tok << " at position " << start << " outside [0,1]";
            throw Error(ErrorKind::scalar_out_of_range, os.str());
        }
        return v;
    }

    Formula formula() {
        skip_ws();
        std::size_t start = pos_;
        std::string head = token();
        if (head == "T") return Formula::top();
        if (head == "not") {
            expect('(');
            Formula f = formula();
            expect(')');
            return Formula::not_(f);
        }
        if (head == "and" || head == "or") {
            expect('(');
            Formula a = formula();
            expect(',');
            Formula b = formula();
            expect(')');
            return head == "and" ? Formula::and_(a, b) : Formula::or_(a, b);
        }
        if (head == "dia" || head == "diap") {
            expect('(');
            ActionId a = action();
            expect(',');
            Formula f = formula();
            expect(')');
            return head == "dia" ? Formula::dia(std::move(a), f)
                                 : Formula::dia_prime(std::move(a), f);
        }
        if (head == "add" || head == "sub") {
            expect('(');
            Formula f = formula();
            expect(',');
            Scalar r = number();
            expect(')');
            return head == "add" ? Formula::add(f, r) : Formula::sub(f, r);
        }
        if (head == "scale") {
            expect('(');
            Scalar r = number();
            expect(',');
            Formula f = formula();
            expect(')');
            return Formula::scale(r, f);
        }
        if (head == "cc") {
            expect('(');
            Scalar r = number();
            expect(',');
            Formula a = formula();
            expect(',');
            Formula b = formula();
            expect(')');
            return Formula::cx(r, a, b);
        }
        if (head == "rew") {
            expect('(');
            ActionId a = action();
            expect(')');
            return Formula::rew(std::move(a));
        }
        if (head == "plus") {
            expect('(');
            Formula a = formula();
            expect(',');
            Formula b = formula();
            expect(')');
            return Formula::plus(a, b);
        }
        throw SyntaxError(start, at() + "unknown connective \"" + head + "\"");
    }

    const std::string& text_;
    const Mdp& m_;
    std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(const std::string& text, const Mdp& m) { return Parser(text, m).run(); }

const Vec& Evaluator::eval(const Formula& f) {
    const Formula::Node* key = f.raw();
    auto hit = cache_.find(key);
    if (hit != cache_.end()) return hit->second.value;

    const Eigen::Index n = m_->n_states();
    Vec v;
    switch (f.op()) {
        case FormulaOp::top:
            v = Vec::Ones(n);
            break;
        case FormulaOp::not_:
            v = Vec::Ones(n) - eval(f.lhs());
            break;
        case FormulaOp::and_:
            v = eval(f.lhs()).cwiseMin(eval(f.rhs()));
            break;
        case FormulaOp::dia: {
            m_->check_action(f.action());
            const Eigen::Index a = f.action().index;
            const Vec sub = eval(f.lhs());
            v.resize(n);
            for (StateId x = 0; x < n; ++x) {
                v(x) = c_.c * expectation(sub, m_->kernel(a, x)) +
                       (1.0 - c_.c) * m_->reward(a, x);
            }
            // projection back onto [0,1] wipes out ulp-level excursions
            v = v.cwiseMax(0.0).cwiseMin(1.0);
            break;
        }
        case FormulaOp::add_c:
            v = (eval(f.lhs()).array() + f.scalar()).min(1.0).matrix();
            break;
        case FormulaOp::sub_c:
            v = (eval(f.lhs()).array() - f.scalar()).max(0.0).matrix();
            break;
        case FormulaOp::scale:
            v = f.scalar() * eval(f.lhs());
            break;
        case FormulaOp::cx:
            v = f.scalar() * eval(f.lhs()) + (1.0 - f.scalar()) * eval(f.rhs());
            v = v.cwiseMax(0.0).cwiseMin(1.0);
            break;
        case FormulaOp::rew:
            m_->check_action(f.action());
            v = m_->rewards(f.action().index);
            break;
        case FormulaOp::dia_prime: {
            m_->check_action(f.action());
            const Eigen::Index a = f.action().index;
            const Vec sub = eval(f.lhs());
            v.resize(n);
            for (StateId x = 0; x < n; ++x) {
                v(x) = c_.c * expectation(sub, m_->kernel(a, x));
            }
            v = v.cwiseMax(0.0).cwiseMin(1.0);
            break;
        }
        case FormulaOp::plus:
            v = (eval(f.lhs()).array() + eval(f.rhs()).array()).min(1.0).matrix();
            break;
    }
    auto [it, inserted] = cache_.emplace(key, CacheEntry{f.shared(), std::move(v)});
    return it->second.value;
}

Vec eval_formula(const Formula& f, const Mdp& m, DiscountConfig c) {
    Evaluator ev(m, c);
    return ev.eval(f);
}

PMetric logical_distance(const std::vector<Formula>& formulas, const Mdp& m, DiscountConfig c) {
    if (formulas.empty()) {
        throw Error(ErrorKind::empty_formula_set,
                    "logical distance needs at least one formula");
    }
    Evaluator ev(m, c);
    const Eigen::Index n = m.n_states();
    Mat d = Mat::Zero(n, n);
    for (const Formula& f : formulas) {
        const Vec& v = ev.eval(f);
        for (StateId x = 0; x < n; ++x) {
            for (StateId y = x + 1; y < n; ++y) {
                const Scalar gap = std::abs(v(x) - v(y));
                if (gap > d(x, y)) {
                    d(x, y) = gap;
                    d(y, x) = gap;
                }
            }
        }
    }
    return PMetric::unchecked(std::move(d));
}

const std::vector<Scalar>& default_scalar_grid() {
    static const std::vector<Scalar> grid{0.25, 0.5, 0.75};
    return grid;
}

namespace {

// Value vectors rounded to 1e-12 index the semantic-equivalence classes.
struct VecKey {
    std::vector<std::int64_t> rounded;

    bool operator==(const VecKey& other) const { return rounded == other.rounded; }
};

struct VecKeyHash {
    std::size_t operator()(const VecKey& k) const {
        std::size_t h = 1469598103934665603ull;
        for (std::int64_t v : k.rounded) {
            h ^= static_cast<std::size_t>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

VecKey make_key(const Vec& v) {
    VecKey k;
    k.rounded.reserve(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        k.rounded.push_back(std::llround(v(i) * 1e12));
    }
    return k;
}

}  // namespace

std::vector<Formula> enumerate_formulas(const Mdp& m, DiscountConfig c, int depth,
                                        const std::vector<Scalar>& scalar_grid) {
    return enumerate_formulas_budgeted(m, c, depth, scalar_grid,
                                       std::numeric_limits<std::size_t>::max())
        .formulas;
}

BudgetedFormulas enumerate_formulas_budgeted(const Mdp& m, DiscountConfig c, int depth,
                                             const std::vector<Scalar>& scalar_grid,
                                             std::size_t max_pool) {
    if (depth < 0) throw Error(ErrorKind::validation, "enumeration depth must be nonnegative");
    if (max_pool == 0) throw Error(ErrorKind::validation, "enumeration budget must be positive");
    for (Scalar r : scalar_grid) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw Error(ErrorKind::scalar_out_of_range, "enumeration grid scalar outside [0,1]");
        }
    }
    const std::size_t work_cap = max_pool > std::numeric_limits<std::size_t>::max() / 500
                                     ? std::numeric_limits<std::size_t>::max()
                                     : 500 * max_pool;

    struct Entry {
        Formula f;
        Vec value;
    };
    const Eigen::Index n = m.n_states();
    std::vector<Entry> entries;
    std::unordered_map<VecKey, std::size_t, VecKeyHash> seen;

    // Candidate vectors are computed from the parents' vectors and a node is
    // allocated only for semantically new candidates, so duplicate candidates
    // cost one hash lookup and no memory.
    auto offer = [&](Vec v, const auto& build) {
        VecKey key = make_key(v);
        if (seen.emplace(std::move(key), entries.size()).second) {
            entries.push_back({build(), std::move(v)});
        }
    };

    auto dia_vec = [&](Eigen::Index a, const Vec& sub) {
        Vec v(n);
        for (StateId x = 0; x < n; ++x) {
            v(x) = c.c * expectation(sub, m.kernel(a, x)) + (1.0 - c.c) * m.reward(a, x);
        }
        return v.cwiseMax(0.0).cwiseMin(1.0).eval();
    };

    offer(Vec::Ones(n), [] { return Formula::top(); });
    BudgetedFormulas result;
    std::size_t band_lo = 0;
    for (int level = 1; level <= depth; ++level) {
        const std::size_t band_hi = entries.size();
        // The candidate count for this band is exact arithmetic on the band
        // sizes, so both budget checks run before any work is done.
        const std::size_t band = band_hi - band_lo;
        const std::size_t unary =
            band * (1 + static_cast<std::size_t>(m.n_actions()) + 2 * scalar_grid.size());
        const std::size_t pairs = band * band_lo + band * (band + 1) / 2;
        if (entries.size() >= max_pool || unary + pairs > work_cap) {
            result.completed_depth = level - 1;
            break;
        }
        result.completed_depth = level;
        // candidates whose deepest argument sits in the previous band; copies,
        // because `offer` may grow `entries` and invalidate references
        for (std::size_t i = band_lo; i < band_hi; ++i) {
            const Vec v = entries[i].value;
            const Formula f = entries[i].f;
            offer(Vec::Ones(n) - v, [&] { return Formula::not_(f); });
            for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                offer(dia_vec(a, v), [&] { return Formula::dia(m.action_id(a), f); });
            }
            for (Scalar r : scalar_grid) {
                offer((v.array() + r).min(1.0).matrix(), [&] { return Formula::add(f, r); });
                offer((v.array() - r).max(0.0).matrix(), [&] { return Formula::sub(f, r); });
            }
        }
        for (std::size_t j = band_lo; j < band_hi; ++j) {
            for (std::size_t i = 0; i <= j; ++i) {
                offer(entries[i].value.cwiseMin(entries[j].value),
                      [&] { return Formula::and_(entries[i].f, entries[j].f); });
            }
        }
        band_lo = band_hi;
        if (band_lo == entries.size()) {
            // A saturated level stays saturated, so every deeper enumeration
            // coincides with this one.
            result.completed_depth = depth;
            break;
        }
    }

    result.formulas.reserve(entries.size());
    for (const Entry& e : entries) result.formulas.push_back(e.f);
    return result;
}

namespace {

void check_predicate(const Predicate& h, const Mdp& m) {
    if (h.size() != m.n_states()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "predicate size does not match the model's state count");
    }
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        if (!(h(i) >= 0.0 && h(i) <= 1.0)) {
            std::ostringstream os;
            os << "predicate entry " << i << " = " << h(i) << " outside [0,1]";
            throw Error(ErrorKind::validation, os.str());
        }
    }
}

// Shared-evaluator core of approximate_at_pair; see the header for the
// construction and the ulp-nudge argument.
Formula approximate_at_pair_impl(const Predicate& h, StateId x, StateId y,
                                 const Formula& witness, Scalar eps, Evaluator& ev) {
    const Mdp& m = ev.model();
    check_predicate(h, m);
    if (x < 0 || x >= m.n_states() || y < 0 || y >= m.n_states()) {
        throw Error(ErrorKind::index_out_of_range, "pair approximation state out of range");
    }
    if (!(eps > 0.0)) throw Error(ErrorKind::validation, "eps must be positive");
    if (!(h(x) >= h(y))) {
        std::ostringstream os;
        os << "pair approximation requires h(x) >= h(y); got h(" << x << ") = " << h(x)
           << ", h(" << y << ") = " << h(y);
        throw Error(ErrorKind::hypothesis_violated, os.str());
    }
    const Vec& f = ev.eval(witness);
    const Scalar gap = h(x) - h(y);
    if (!(f(x) - f(y) > gap - eps)) {
        std::ostringstream os;
        os << "witness value gap " << f(x) - f(y) << " at (" << x << "," << y
           << ") does not dominate h gap " << gap << " minus eps " << eps;
        throw Error(ErrorKind::hypothesis_violated, os.str());
    }

    const Formula clipped = Formula::sub(witness, f(y));
    Scalar s = 1.0 - gap;
    for (int attempt = 0; attempt < 64; ++attempt) {
        Formula psi =
            Formula::add(Formula::and_(clipped, Formula::sub(Formula::top(), s)), h(y));
        const Vec& v = ev.eval(psi);
        if (v(x) <= h(x)) return psi;
        s = std::nextafter(s, 1.0);  // shrinks the encoded constant 1-s
    }
    throw Error(ErrorKind::hypothesis_violated,
                "pair approximation could not settle below h(x); hypothesis margin too thin");
}

Formula lattice_approximate_impl(const Predicate& h, Scalar eps,
                                 const PairWitnessMap& pair_witnesses, Evaluator& ev) {
    const Mdp& m = ev.model();
    check_predicate(h, m);
    if (!(eps > 0.0)) throw Error(ErrorKind::validation, "eps must be positive");
    const Eigen::Index n = m.n_states();

    auto pair_formula = [&](StateId u, StateId v) -> Formula {
        // orient so the larger h value comes first
        const StateId p = h(u) >= h(v) ? u : v;
        const StateId q = h(u) >= h(v) ? v : u;
        if (p == q || (u == v)) {
            return approximate_at_pair_impl(h, u, u, Formula::top(), eps, ev);
        }
        auto it = pair_witnesses.find({p, q});
        if (it == pair_witnesses.end()) {
            std::ostringstream os;
            os << "no witness supplied for ordered pair (" << p << "," << q << ")";
            throw Error(ErrorKind::missing_witness, os.str());
        }
        return approximate_at_pair_impl(h, p, q, it->second, eps, ev);
    };

    Formula g = Formula::top();  // replaced by the first row term
    for (StateId u = 0; u < n; ++u) {
        Formula row = pair_formula(u, 0);
        for (StateId v = 1; v < n; ++v) {
            row = Formula::and_(row, pair_formula(u, v));
        }
        g = (u == 0) ? row : Formula::or_(g, row);
    }
    return g;
}

}  // namespace

Formula approximate_at_pair(const Predicate& h, StateId x, StateId y, const Formula& witness,
                            Scalar eps, const Mdp& m, DiscountConfig c) {
    Evaluator ev(m, c);
    return approximate_at_pair_impl(h, x, y, witness, eps, ev);
}

Formula lattice_approximate(const Predicate& h, Scalar eps, const PairWitnessMap& pair_witnesses,
                            const Mdp& m, DiscountConfig c) {
    Evaluator ev(m, c);
    return lattice_approximate_impl(h, eps, pair_witnesses, ev);
}

WitnessSet expressivity_witnesses(const Mdp& m, DiscountConfig c, int depth, Scalar eps) {
    if (depth < 0) throw Error(ErrorKind::validation, "witness depth must be nonnegative");
    if (!(eps > 0.0)) throw Error(ErrorKind::validation, "eps must be positive");
    const Eigen::Index n = m.n_states();
    Evaluator ev(m, c);

    std::vector<Formula> pool{Formula::top()};
    std::vector<Formula> all{Formula::top()};
    PMetric iterate = zero_pmetric(n);

    // best signed value gap over the pool and its negations, plus the formula
    // achieving it (negation closure realizes both orientations)
    auto best_pool_witness = [&](StateId u, StateId v) {
        Scalar best = -2.0;
        Formula best_f = Formula::top();
        for (const Formula& f : pool) {
            const Vec& w = ev.eval(f);
            const Scalar fwd = w(u) - w(v);
            if (fwd > best) {
                best = fwd;
                best_f = f;
            }
            if (-fwd > best) {
                best = -fwd;
                best_f = Formula::not_(f);
            }
        }
        return best_f;
    };

    for (int level = 1; level <= depth; ++level) {
        const PMetric next = apply_functional(iterate, c, m);
        // pool error after `level-1` levels: delta(n+1) = c*(delta(n)+eps)
        Scalar delta_prev = 0.0;
        for (int k = 1; k < level; ++k) delta_prev = c.c * (delta_prev + eps);
        const Scalar lattice_eps = delta_prev + eps;

        std::vector<Formula> fresh;
        for (StateId x = 0; x < n; ++x) {
            for (StateId y = x + 1; y < n; ++y) {
                // action maximizing the one-step distance, lowest index on ties
                Eigen::Index best_a = 0;
                Scalar best_lift = -1.0;
                for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                    const Scalar w =
                        (m.kernel(a, x) == m.kernel(a, y))
                            ? 0.0
                            : wasserstein_primal(iterate, m.kernel(a, x), m.kernel(a, y)).value;
                    const Scalar lift =
                        c.c * w + (1.0 - c.c) * std::abs(m.reward(a, x) - m.reward(a, y));
                    if (lift > best_lift) {
                        best_lift = lift;
                        best_a = a;
                    }
                }
                // reward-dominant state first
                const StateId p = m.reward(best_a, x) >= m.reward(best_a, y) ? x : y;
                const StateId q = p == x ? y : x;

                TransportSolution dual =
                    wasserstein_dual(iterate, m.kernel(best_a, p), m.kernel(best_a, q));
                Vec h = dual.potential;
                if ((m.kernel(best_a, p).probs() - m.kernel(best_a, q).probs()).dot(h) < 0.0) {
                    h = Vec::Ones(n) - h;  // flip keeps shortness, negates the objective
                }

                PairWitnessMap pw;
                for (StateId u = 0; u < n; ++u) {
                    for (StateId v = 0; v < n; ++v) {
                        if (u != v && h(u) >= h(v)) {
                            pw.emplace(std::make_pair(u, v), best_pool_witness(u, v));
                        }
                    }
                }
                Formula g = lattice_approximate_impl(h, lattice_eps, pw, ev);
                Formula w = Formula::dia(m.action_id(best_a), g);
                fresh.push_back(w);
                all.push_back(w);
                all.push_back(Formula::not_(w));
            }
        }
        fresh.push_back(Formula::top());  // zero-gap witness for tied pairs
        pool = std::move(fresh);
        iterate = next;
    }

    Mat achieved = Mat::Zero(n, n);
    for (const Formula& f : all) {
        const Vec& v = ev.eval(f);
        for (StateId x = 0; x < n; ++x) {
            for (StateId y = 0; y < n; ++y) {
                achieved(x, y) = std::max(achieved(x, y), v(x) - v(y));
            }
        }
    }
    return {std::move(all), std::move(achieved)};
}

}  // namespace bisimet
