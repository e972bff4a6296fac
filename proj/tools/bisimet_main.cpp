// Command line front end: validate models, compute fixpoint metrics, solve
// single transport problems, evaluate formulas, compare logical distances
// against the fixpoint, and run seeded property suites.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation or parse failure,
// 3 internal solver failure. All outputs are deterministic functions of the
// inputs, flags, and seed.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bisimet/logic.hpp"
#include "bisimet/metric.hpp"
#include "bisimet/model_io.hpp"
#include "bisimet/random.hpp"
#include "bisimet/transport.hpp"

namespace {

using namespace bisimet;
using ordered_json = nlohmann::ordered_json;

struct Options {
    std::string model_path;
    Scalar discount = 0.5;
    Scalar tol = 1e-9;
    bool tol_given = false;
    int max_iters = 0;
    Scalar p = 1.0;
    int depth = 4;
    Scalar epsilon = 1e-4;
    std::string out;
    std::uint64_t seed = 1;
    std::string language = "Lprime";

    std::string metric_path;
    long long x = 0;
    long long y = 0;
    std::string action;
    std::string formula;
};

Mdp load(const Options& opt) {
    if (opt.model_path.empty()) {
        throw Error(ErrorKind::validation, "this command needs --model");
    }
    return load_model(opt.model_path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_failure, "cannot open output file: " + path);
    out << text;
    if (!out) throw Error(ErrorKind::io_failure, "error writing output file: " + path);
}

std::string metric_csv_text(const std::vector<std::string>& names, const Mat& d) {
    std::ostringstream os;
    write_metric_csv(os, names, d);
    return os.str();
}

int cmd_validate(const Options& opt) {
    const Mdp m = load(opt);
    std::cout << "OK: " << m.n_states() << (m.n_states() == 1 ? " state, " : " states, ")
              << m.n_actions() << (m.n_actions() == 1 ? " action" : " actions") << "\n";
    return 0;
}

int cmd_bisim(const Options& opt) {
    const Mdp m = load(opt);
    const DiscountConfig c(opt.discount);
    const FixpointReport r = bisim_metric(m, c, opt.tol, opt.max_iters);

    const std::string csv = metric_csv_text(m.state_names(), r.metric.values());
    if (opt.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(opt.out, csv);
    }

    ordered_json report;
    report["iterations"] = r.iterations;
    report["final_delta"] = r.final_delta;
    report["converged"] = r.converged;
    report["discount"] = opt.discount;
    report["tol"] = opt.tol;
    std::cerr << report.dump(2) << "\n";
    if (!r.converged) {
        std::cerr << "warning: iteration stopped at the budget before reaching the tolerance\n";
    }
    return 0;
}

int cmd_wasserstein(const Options& opt) {
    const Mdp m = load(opt);
    if (opt.metric_path.empty()) {
        throw Error(ErrorKind::validation, "wasserstein needs --metric");
    }
    const auto [names, dm] = read_metric_csv_file(opt.metric_path);
    if (names != m.state_names()) {
        throw Error(ErrorKind::validation,
                    "metric CSV state names do not match the model's states");
    }
    const PMetric d = validate_pmetric(dm);
    const Eigen::Index a = m.action_index(opt.action);
    const Eigen::Index n = m.n_states();
    if (opt.x < 0 || opt.x >= n || opt.y < 0 || opt.y >= n) {
        throw Error(ErrorKind::index_out_of_range, "--x/--y must name states of the model");
    }
    const Dist& mu = m.kernel(a, static_cast<StateId>(opt.x));
    const Dist& nu = m.kernel(a, static_cast<StateId>(opt.y));

    if (!(opt.p >= 1.0)) {
        throw Error(ErrorKind::invalid_exponent, "order p must be at least 1");
    }
    // For p > 1 the LP runs on the entrywise p-th power of the costs; the
    // reported value is the p-th root of that optimum and the coupling,
    // potential, and gap describe the powered problem.
    const PMetric cost =
        opt.p == 1.0 ? d : PMetric::unchecked(d.values().array().pow(opt.p).matrix());
    const TransportSolution s = solve_transport(cost, mu, nu);
    const Scalar value = opt.p == 1.0 ? s.value : std::pow(s.value, 1.0 / opt.p);

    ordered_json j;
    j["value"] = value;
    j["p"] = opt.p;
    j["transport_cost"] = s.value;
    j["gap"] = s.gap;
    ordered_json coupling = ordered_json::array();
    for (Eigen::Index r = 0; r < s.coupling.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index col = 0; col < s.coupling.cols(); ++col) {
            row.push_back(s.coupling(r, col));
        }
        coupling.push_back(std::move(row));
    }
    j["coupling"] = std::move(coupling);
    ordered_json potential = ordered_json::array();
    for (Eigen::Index i = 0; i < s.potential.size(); ++i) potential.push_back(s.potential(i));
    j["potential"] = std::move(potential);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_eval(const Options& opt) {
    const Mdp m = load(opt);
    if (opt.formula.empty()) throw Error(ErrorKind::validation, "eval needs --formula");
    const Formula f = parse_formula(opt.formula, m);
    if (opt.language == "L" && f.language() == Language::l_prime) {
        throw Error(ErrorKind::validation,
                    "formula uses extended operators; pass --language Lprime to allow them");
    }
    const Vec v = eval_formula(f, m, DiscountConfig(opt.discount));
    ordered_json j;
    for (StateId x = 0; x < m.n_states(); ++x) j[m.state_name(x)] = v(x);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_logdist(const Options& opt) {
    const Mdp m = load(opt);
    const DiscountConfig c(opt.discount);

    const FixpointReport r = bisim_metric(m, c, opt.tol, opt.max_iters);
    // Enumeration grows superexponentially with depth, so it runs under a
    // fixed budget and the summary reports the depth it actually completed;
    // the witness construction scales to the full requested depth.
    constexpr std::size_t enum_budget = 20000;
    const BudgetedFormulas enumerated =
        enumerate_formulas_budgeted(m, c, opt.depth, default_scalar_grid(), enum_budget);
    const PMetric enum_ld = logical_distance(enumerated.formulas, m, c);
    const WitnessSet ws = expressivity_witnesses(m, c, opt.depth, opt.epsilon);

    const std::string enum_csv = metric_csv_text(m.state_names(), enum_ld.values());
    const std::string wit_csv = metric_csv_text(m.state_names(), ws.achieved);

    ordered_json summary;
    summary["states"] = m.n_states();
    summary["discount"] = opt.discount;
    summary["depth"] = opt.depth;
    summary["enum_depth_completed"] = enumerated.completed_depth;
    summary["epsilon"] = opt.epsilon;
    summary["formulas_enumerated"] = enumerated.formulas.size();
    summary["witness_formulas"] = ws.formulas.size();
    summary["bisim_iterations"] = r.iterations;
    summary["bisim_converged"] = r.converged;
    // Signed slack of each lower bound against the fixpoint metric; adequacy
    // keeps the excess columns at numerical noise.
    summary["max_gap_enum_to_bisim"] = (r.metric.values() - enum_ld.values()).maxCoeff();
    summary["max_gap_witness_to_bisim"] = (r.metric.values() - ws.achieved).maxCoeff();
    summary["max_enum_excess"] = (enum_ld.values() - r.metric.values()).maxCoeff();
    summary["max_witness_excess"] = (ws.achieved - r.metric.values()).maxCoeff();

    if (opt.out.empty()) {
        std::cout << enum_csv << "\n" << wit_csv;
        std::cerr << summary.dump(2) << "\n";
    } else {
        write_text_file(opt.out + ".enum.csv", enum_csv);
        write_text_file(opt.out + ".witness.csv", wit_csv);
        std::cout << summary.dump(2) << "\n";
    }
    return 0;
}

// One property suite of the self test: run `total` checks, record the first
// few failure descriptions, and print "name: passed/total".
struct Suite {
    std::string name;
    int total = 0;
    int passed = 0;
    std::vector<std::string> failures;

    explicit Suite(std::string suite_name) : name(std::move(suite_name)) {}

    void tally(bool ok, const std::function<std::string()>& describe) {
        ++total;
        if (ok) {
            ++passed;
        } else if (failures.size() < 3) {
            failures.push_back(describe());
        }
    }

    bool report() const {
        std::cout << name << ": " << passed << "/" << total << "\n";
        for (const std::string& f : failures) std::cout << "  " << f << "\n";
        return passed == total;
    }
};

int cmd_selftest(const Options& opt) {
    // An explicit --tol overrides every suite's comparison tolerance, which
    // makes --tol 0 a deliberate way to see failure reporting.
    auto tol_or = [&](Scalar suite_default) { return opt.tol_given ? opt.tol : suite_default; };
    bool all_ok = true;

    {
        Suite s("duality");
        Rng rng(opt.seed);
        for (int i = 0; i < 100; ++i) {
            const Eigen::Index n = 2 + (i % 5);
            const PMetric d = random_pmetric(rng, n);
            const Dist mu = random_dist(rng, n);
            const Dist nu = random_dist(rng, n);
            const Scalar gap = duality_gap(d, mu, nu);
            s.tally(gap <= tol_or(TransportSolution::gap_tol), [&] {
                std::ostringstream os;
                os << "instance " << i << " (n=" << n << "): duality gap " << gap;
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    {
        Suite s("metric-axioms");
        Rng rng(opt.seed + 1);
        const Scalar tol = tol_or(PMetric::axiom_tol);
        for (int i = 0; i < 20; ++i) {
            const Mdp m = random_mdp(rng, 2 + (i % 4), 1 + (i % 2));
            const Eigen::Index n = m.n_states();
            Scalar worst = 0.0;
            bisim_metric(m, DiscountConfig(opt.discount), 1e-9, 0,
                         [&](int, const PMetric& d) {
                             for (StateId x = 0; x < n; ++x) {
                                 worst = std::max(worst, std::abs(d(x, x)));
                                 for (StateId y = 0; y < n; ++y) {
                                     worst = std::max(worst, std::abs(d(x, y) - d(y, x)));
                                     for (StateId z = 0; z < n; ++z) {
                                         worst = std::max(worst, d(x, z) - d(x, y) - d(y, z));
                                     }
                                 }
                             }
                         });
            s.tally(worst <= tol, [&] {
                std::ostringstream os;
                os << "model " << i << ": worst axiom slack " << worst;
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    {
        Suite s("fixpoint-residual");
        Rng rng(opt.seed + 2);
        const Scalar tol = tol_or(1e-9);
        for (int i = 0; i < 10; ++i) {
            const Mdp m = random_mdp(rng, 2 + (i % 4), 1 + (i % 3));
            const DiscountConfig c(opt.discount);
            const FixpointReport r = bisim_metric(m, c);
            const Scalar res = std::abs(functional_residual(m, c, r.metric));
            s.tally(res <= tol, [&] {
                std::ostringstream os;
                os << "model " << i << ": residual " << res;
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    {
        Suite s("nonexpansive-ops");
        Rng rng(opt.seed + 3);
        const Scalar slack = tol_or(1e-12);
        const char* names[6] = {"not", "and", "add", "sub", "scale", "cc"};
        Scalar worst[6] = {0, 0, 0, 0, 0, 0};
        for (int i = 0; i < 10000; ++i) {
            const Scalar u1 = rng.uniform01(), u2 = rng.uniform01();
            const Scalar v1 = rng.uniform01(), v2 = rng.uniform01();
            const Scalar r = rng.uniform01();
            const Scalar in_gap = std::max(std::abs(u1 - u2), std::abs(v1 - v2));
            const Scalar outs[6] = {
                std::abs((1.0 - u1) - (1.0 - u2)),
                std::abs(std::min(u1, v1) - std::min(u2, v2)),
                std::abs(std::min(1.0, u1 + r) - std::min(1.0, u2 + r)),
                std::abs(std::max(0.0, u1 - r) - std::max(0.0, u2 - r)),
                std::abs(r * u1 - r * u2),
                std::abs((r * u1 + (1 - r) * v1) - (r * u2 + (1 - r) * v2)),
            };
            for (int k = 0; k < 6; ++k) worst[k] = std::max(worst[k], outs[k] - in_gap);
        }
        for (int k = 0; k < 6; ++k) {
            s.tally(worst[k] <= slack, [&] {
                std::ostringstream os;
                os << names[k] << ": worst excess " << worst[k];
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    {
        Suite s("pair-approximation");
        Rng rng(opt.seed + 4);
        const Scalar exact_tol = tol_or(1e-12);
        for (int i = 0; i < 100; ++i) {
            const Eigen::Index n = 2 + (i % 4);
            Predicate h = random_predicate(rng, n);
            StateId x = rng.uniform_index(0, n - 1);
            StateId y = rng.uniform_index(0, n - 1);
            if (h(x) < h(y)) std::swap(x, y);
            Vec r = random_predicate(rng, n);
            r(x) = std::min(1.0, h(x) + 0.25 * rng.uniform01());
            r(y) = std::max(0.0, h(y) - 0.25 * rng.uniform01());
            std::vector<Dist> rows;
            std::vector<std::string> names;
            for (Eigen::Index q = 0; q < n; ++q) {
                rows.push_back(dirac(q, n));
                names.push_back("s" + std::to_string(q));
            }
            const Mdp m = make_mrp(names, rows, r);
            const DiscountConfig zero(0.0);
            const Scalar eps = 1e-4;
            const Formula psi = approximate_at_pair(
                h, x, y, Formula::dia(m.action_id(0), Formula::top()), eps, m, zero);
            const Vec v = eval_formula(psi, m, zero);
            const bool ok = std::abs(v(y) - h(y)) <= exact_tol && h(x) - v(x) >= -exact_tol &&
                            h(x) - v(x) < eps + exact_tol;
            s.tally(ok, [&] {
                std::ostringstream os;
                os << "tuple " << i << ": psi(y)-h(y) = " << v(y) - h(y)
                   << ", h(x)-psi(x) = " << h(x) - v(x);
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    {
        Suite s("certificates");
        Rng rng(opt.seed + 5);
        for (int i = 0; i < 10; ++i) {
            const Mdp m = random_mdp(rng, 2 + (i % 4), 1 + (i % 2));
            const DiscountConfig c(opt.discount);
            const PMetric fix = bisim_metric(m, c).metric;
            bool ok = certify_upper_bound(m, c, fix);
            // The zero metric must be rejected whenever some pair of states
            // has distinct rewards under some action.
            bool distinct = false;
            for (Eigen::Index a = 0; a < m.n_actions() && !distinct; ++a) {
                const Vec& r = m.rewards(a);
                distinct = (r.maxCoeff() - r.minCoeff()) > 1e-12;
            }
            if (distinct && opt.discount < 1.0) {
                ok = ok && !certify_upper_bound(m, c, zero_pmetric(m.n_states()));
            }
            s.tally(ok, [&] {
                std::ostringstream os;
                os << "model " << i << ": certificate check failed";
                return os.str();
            });
        }
        all_ok &= s.report();
    }

    std::cout << "selftest: " << (all_ok ? "PASS" : "FAIL") << " (seed " << opt.seed << ")\n";
    return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discounted bisimulation pseudometrics, optimal transport, and a "
                 "quantitative modal logic for finite Markov models"};
    app.require_subcommand(1);

    Options opt;

    auto add_common = [&](CLI::App* sub, bool needs_model) {
        auto* model = sub->add_option("--model", opt.model_path, "Model JSON file");
        if (needs_model) model->required();
        sub->add_option("--discount", opt.discount, "Discount factor in [0,1]")
            ->capture_default_str();
        sub->add_option("--tol", opt.tol, "Convergence / comparison tolerance")
            ->capture_default_str()
            ->each([&opt](const std::string&) { opt.tol_given = true; });
        sub->add_option("--max-iters", opt.max_iters,
                        "Iteration budget (0 picks a discount-based default)")
            ->capture_default_str();
        sub->add_option("--seed", opt.seed, "PRNG seed for random instances")
            ->capture_default_str();
    };

    CLI::App* validate = app.add_subcommand("validate", "Load and validate a model");
    add_common(validate, true);

    CLI::App* bisim = app.add_subcommand(
        "bisim", "Iterate the metric functional to its least fixpoint; print CSV");
    add_common(bisim, true);
    bisim->add_option("--out", opt.out, "Write the metric CSV here instead of stdout");

    CLI::App* wass = app.add_subcommand(
        "wasserstein", "Optimal transport between two successor distributions");
    add_common(wass, true);
    wass->add_option("--metric", opt.metric_path, "Ground metric CSV")->required();
    wass->add_option("--x", opt.x, "First state index")->required();
    wass->add_option("--y", opt.y, "Second state index")->required();
    wass->add_option("--action", opt.action, "Action label")->required();
    wass->add_option("--p", opt.p, "Order of the transport distance")->capture_default_str();

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a formula on every state");
    add_common(eval, true);
    eval->add_option("--formula", opt.formula, "Formula text")->required();
    eval->add_option("--language", opt.language, "Accepted fragment: L or Lprime")
        ->check(CLI::IsMember({"L", "Lprime"}))
        ->capture_default_str();

    CLI::App* logdist = app.add_subcommand(
        "logdist", "Logical lower bounds for the fixpoint metric, by enumeration and "
                   "by constructed witnesses");
    add_common(logdist, true);
    logdist->add_option("--depth", opt.depth,
                        "Formula depth / witness levels (enumeration is budget-capped at "
                        "20000 formulas; the summary reports the depth it completed)")
        ->capture_default_str();
    logdist->add_option("--epsilon", opt.epsilon, "Witness approximation slack")
        ->capture_default_str();
    logdist->add_option("--out", opt.out,
                        "Base path; writes <base>.enum.csv and <base>.witness.csv");

    CLI::App* selftest = app.add_subcommand("selftest", "Seeded property suites");
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(opt);
        if (bisim->parsed()) return cmd_bisim(opt);
        if (wass->parsed()) return cmd_wasserstein(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (logdist->parsed()) return cmd_logdist(opt);
        if (selftest->parsed()) return cmd_selftest(opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
