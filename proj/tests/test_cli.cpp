// End-to-end tests of the command line tool: every subcommand is driven as a
// child process and judged on exit code, stdout, stderr, and files written.

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "bisimet/metric.hpp"
#include "bisimet/model_io.hpp"
#include "bisimet/transport.hpp"
#include "helpers.hpp"

namespace {

using namespace bisimet;
using nlohmann::json;

std::filesystem::path scratch_dir() {
    static const std::filesystem::path dir = [] {
        std::filesystem::path p = std::filesystem::temp_directory_path() /
                                  ("bisimet-cli-test-" + std::to_string(::getpid()));
        std::filesystem::create_directories(p);
        return p;
    }();
    return dir;
}

std::filesystem::path scratch_file(const std::string& name) {
    static int counter = 0;
    return scratch_dir() / (std::to_string(counter++) + "-" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const std::filesystem::path out = scratch_file("stdout.txt");
    const std::filesystem::path err = scratch_file("stderr.txt");
    const std::string cmd = std::string(BISIMET_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    r.code = WEXITSTATUS(status);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string model_arg(const std::string& fixture) {
    return "--model " + testutil::data_path(fixture);
}

/// Parses the cell at (row, col) of a metric CSV (header + n data rows).
Scalar csv_cell(const std::string& csv, int row, int col) {
    std::istringstream is(csv);
    auto [names, d] = read_metric_csv(is);
    REQUIRE(row < d.rows());
    REQUIRE(col < d.cols());
    return d(row, col);
}

const std::string three_chain_fixpoint_csv =
    "s0,s1,s2\n"
    "0.000000000000,0.312500000000,0.562500000000\n"
    "0.312500000000,0.000000000000,0.250000000000\n"
    "0.562500000000,0.250000000000,0.000000000000\n";

}  // namespace

TEST_CASE("validate reports state and action counts on success") {
    const RunResult r = run_cli("validate " + model_arg("two_state.json"));
    CHECK(r.code == 0);
    CHECK(r.out == "OK: 2 states, 1 action\n");
    CHECK(r.err.empty());

    const RunResult r3 = run_cli("validate " + model_arg("two_action.json"));
    CHECK(r3.code == 0);
    CHECK(r3.out == "OK: 4 states, 2 actions\n");
}

TEST_CASE("validate failure modes map onto the documented exit codes") {
    const RunResult bad_row = run_cli("validate " + model_arg("invalid_row.json"));
    CHECK(bad_row.code == 2);
    CHECK(contains(bad_row.err, "\"a\""));
    CHECK(contains(bad_row.err, "state 0"));

    const RunResult missing = run_cli("validate " + model_arg("no_such_file.json"));
    CHECK(missing.code == 1);
    CHECK(contains(missing.err, "cannot open"));

    const RunResult malformed = run_cli("validate " + model_arg("bad.json"));
    CHECK(malformed.code == 2);
    CHECK(contains(malformed.err, "parse error"));
}

TEST_CASE("bisim prints the fixpoint CSV and a convergence report") {
    const RunResult r = run_cli("bisim " + model_arg("two_state.json"));
    REQUIRE(r.code == 0);
    // The fixpoint is 1; iteration at the default tolerance stops within
    // 10 * tol of it (the exact stopping value is 1 - 2^-30).
    CHECK(std::abs(csv_cell(r.out, 0, 1) - 1.0) <= 1e-8);
    CHECK(csv_cell(r.out, 0, 0) == 0.0);

    const json report = json::parse(r.err);
    CHECK(report.at("iterations").get<int>() == 30);
    CHECK(report.at("converged").get<bool>() == true);
    CHECK(report.at("discount").get<double>() == 0.5);
    CHECK(report.at("tol").get<double>() == 1e-9);
}

TEST_CASE("bisim reproduces the dyadic fixpoint of the three-state chain exactly") {
    const RunResult r = run_cli("bisim " + model_arg("three_chain.json"));
    REQUIRE(r.code == 0);
    CHECK(r.out == three_chain_fixpoint_csv);
}

TEST_CASE("bisim writes the CSV to --out and keeps stdout clean") {
    const std::filesystem::path out = scratch_file("chain.csv");
    const RunResult r = run_cli("bisim " + model_arg("three_chain.json") + " --out " +
                                out.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    CHECK(slurp(out) == three_chain_fixpoint_csv);
}

TEST_CASE("bisim output is byte-identical across repeated runs") {
    const std::string args = "bisim " + model_arg("two_action.json") + " --discount 0.7";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
}

TEST_CASE("bisim with discount zero stops after a single application") {
    const RunResult r = run_cli("bisim " + model_arg("three_chain.json") + " --discount 0");
    REQUIRE(r.code == 0);
    // With no continuation weight the metric is the pairwise reward gap:
    // rewards (1, 0.5, 0) give distances 0.5, 1, 0.5.
    CHECK(r.out ==
          "s0,s1,s2\n"
          "0.000000000000,0.500000000000,1.000000000000\n"
          "0.500000000000,0.000000000000,0.500000000000\n"
          "1.000000000000,0.500000000000,0.000000000000\n");
    const json report = json::parse(r.err);
    CHECK(report.at("iterations").get<int>() == 1);
    CHECK(report.at("converged").get<bool>() == true);
}

TEST_CASE("bisim with discount one ignores rewards and still exits zero") {
    const RunResult r = run_cli("bisim " + model_arg("three_chain.json") + " --discount 1");
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "s0,s1,s2\n"
          "0.000000000000,0.000000000000,0.000000000000\n"
          "0.000000000000,0.000000000000,0.000000000000\n"
          "0.000000000000,0.000000000000,0.000000000000\n");
}

TEST_CASE("bisim surfaces an exhausted iteration budget as a warning, not an error") {
    const RunResult r = run_cli("bisim " + model_arg("two_state.json") + " --max-iters 3");
    REQUIRE(r.code == 0);
    CHECK(contains(r.err, "\"converged\": false"));
    CHECK(contains(r.err, "warning"));
}

TEST_CASE("wasserstein solves a transport problem against a metric CSV") {
    const std::filesystem::path metric = scratch_file("metric.csv");
    REQUIRE(run_cli("bisim " + model_arg("three_chain.json") + " --out " + metric.string())
                .code == 0);

    const RunResult r = run_cli("wasserstein " + model_arg("three_chain.json") + " --metric " +
                                metric.string() + " --x 0 --y 1 --action step");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    // Marginals (0, .5, .5) and (0, 0, 1): half the mass moves from s1 to s2
    // at ground cost d(s1, s2) = 0.25.
    CHECK(j.at("value").get<double>() == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(j.at("gap").get<double>() <= 1e-6);
    CHECK(j.at("p").get<double>() == 1.0);
    const auto coupling = j.at("coupling");
    REQUIRE(coupling.size() == 3);
    Scalar mass = 0;
    for (const auto& row : coupling) {
        REQUIRE(row.size() == 3);
        for (const auto& cell : row) {
            CHECK(cell.get<double>() >= 0.0);
            mass += cell.get<double>();
        }
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& h : j.at("potential")) {
        CHECK(h.get<double>() >= 0.0);
        CHECK(h.get<double>() <= 1.0);
    }
}

TEST_CASE("wasserstein reports zero distance for equal successor rows") {
    const std::filesystem::path metric = scratch_file("bisimilar-metric.csv");
    REQUIRE(run_cli("bisim " + model_arg("bisimilar.json") + " --out " + metric.string())
                .code == 0);
    const RunResult r = run_cli("wasserstein " + model_arg("bisimilar.json") + " --metric " +
                                metric.string() + " --x 0 --y 1 --action a");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("value").get<double>() <= 1e-9);
}

TEST_CASE("wasserstein order-two value matches the library computation") {
    const std::filesystem::path metric = scratch_file("metric2.csv");
    REQUIRE(run_cli("bisim " + model_arg("three_chain.json") + " --out " + metric.string())
                .code == 0);
    const RunResult r = run_cli("wasserstein " + model_arg("three_chain.json") + " --metric " +
                                metric.string() + " --x 0 --y 1 --action step --p 2");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);

    const Mdp m = load_model(testutil::data_path("three_chain.json"));
    const PMetric d = validate_pmetric(read_metric_csv_file(metric.string()).second);
    const Scalar expect = wasserstein_p(d, m.kernel(0, 0), m.kernel(0, 1), 2.0);
    CHECK(j.at("value").get<double>() == doctest::Approx(expect).epsilon(1e-12));
    const Scalar cost = j.at("transport_cost").get<double>();
    CHECK(j.at("value").get<double>() ==
          doctest::Approx(std::sqrt(cost)).epsilon(1e-12));
}

TEST_CASE("wasserstein rejects mismatched inputs with exit code two") {
    const std::filesystem::path metric = scratch_file("two-state-metric.csv");
    REQUIRE(run_cli("bisim " + model_arg("two_state.json") + " --out " + metric.string())
                .code == 0);
    const std::string chain = model_arg("three_chain.json");
    const std::string common = " --metric " + metric.string();

    // State names in the CSV do not match the model.
    CHECK(run_cli("wasserstein " + chain + common + " --x 0 --y 1 --action step").code == 2);

    const std::filesystem::path ok = scratch_file("chain-metric.csv");
    REQUIRE(run_cli("bisim " + chain + " --out " + ok.string()).code == 0);
    const std::string good = " --metric " + ok.string();
    CHECK(run_cli("wasserstein " + chain + good + " --x 0 --y 9 --action step").code == 2);
    CHECK(run_cli("wasserstein " + chain + good + " --x 0 --y 1 --action hop").code == 2);
    CHECK(run_cli("wasserstein " + chain + good + " --x 0 --y 1 --action step --p 0.5").code ==
          2);
}

TEST_CASE("eval prints one value per state as JSON") {
    const RunResult top = run_cli("eval " + model_arg("two_state.json") + " --formula T");
    REQUIRE(top.code == 0);
    const json jt = json::parse(top.out);
    CHECK(jt.at("x").get<double>() == 1.0);
    CHECK(jt.at("y").get<double>() == 1.0);

    const RunResult dia =
        run_cli("eval " + model_arg("two_state.json") + " --formula \"dia(a,T)\"");
    REQUIRE(dia.code == 0);
    const json jd = json::parse(dia.out);
    CHECK(jd.at("x").get<double>() == 1.0);
    CHECK(jd.at("y").get<double>() == 0.5);
}

TEST_CASE("eval rejects malformed formulas with the error position") {
    const RunResult r = run_cli("eval " + model_arg("two_state.json") + " --formula \"and(T\"");
    CHECK(r.code == 2);
    CHECK(contains(r.err, "position 5"));

    const RunResult unk =
        run_cli("eval " + model_arg("two_state.json") + " --formula \"dia(zz,T)\"");
    CHECK(unk.code == 2);
    CHECK(contains(unk.err, "unknown action"));
}

TEST_CASE("eval gates extended operators behind the language flag") {
    const std::string plus = " --formula \"plus(T,T)\"";
    CHECK(run_cli("eval " + model_arg("two_state.json") + plus).code == 0);
    CHECK(run_cli("eval " + model_arg("two_state.json") + plus + " --language Lprime").code ==
          0);
    const RunResult rejected =
        run_cli("eval " + model_arg("two_state.json") + plus + " --language L");
    CHECK(rejected.code == 2);
    CHECK(contains(rejected.err, "extended operators"));
}

TEST_CASE("logdist writes both lower-bound CSVs and a summary") {
    const std::filesystem::path base = scratch_file("ld");
    const RunResult r =
        run_cli("logdist " + model_arg("two_state.json") + " --out " + base.string());
    REQUIRE(r.code == 0);

    // Depth-4 enumeration on the two-state model realizes the fourth iterate
    // 1 - 0.5^4 = 0.9375 exactly, as does the witness construction.
    const std::string enum_csv = slurp(base.string() + ".enum.csv");
    CHECK(csv_cell(enum_csv, 0, 1) >= 0.9375 - 1e-12);
    const std::string wit_csv = slurp(base.string() + ".witness.csv");
    CHECK(csv_cell(wit_csv, 0, 1) == doctest::Approx(0.9375).epsilon(1e-9));

    const json summary = json::parse(r.out);
    CHECK(summary.at("states").get<int>() == 2);
    CHECK(summary.at("depth").get<int>() == 4);
    CHECK(summary.at("enum_depth_completed").get<int>() == 4);
    CHECK(summary.at("formulas_enumerated").get<int>() == 111);
    CHECK(summary.at("bisim_converged").get<bool>() == true);
    // Both bounds approach the fixpoint from below; the shortfall at depth 4
    // is about c^4 and the excess is numerical noise at most.
    CHECK(summary.at("max_gap_enum_to_bisim").get<double>() <= 0.0625 + 1e-8);
    CHECK(summary.at("max_enum_excess").get<double>() <= 1e-6);
    CHECK(summary.at("max_witness_excess").get<double>() <= 1e-6);
}

TEST_CASE("logdist witness bound lands within a percent of the fixpoint at depth ten") {
    for (const char* fixture : {"three_chain.json", "two_action.json"}) {
        const std::filesystem::path base = scratch_file("deep");
        const RunResult r = run_cli("logdist " + model_arg(fixture) + " --depth 10 --out " +
                                    base.string());
        REQUIRE(r.code == 0);
        const json summary = json::parse(r.out);
        CHECK(summary.at("max_gap_witness_to_bisim").get<double>() <= 1e-2);
        CHECK(summary.at("max_witness_excess").get<double>() <= 1e-6);
        // Enumeration cannot follow to depth ten; the budget stops it at a
        // complete shallower band and the summary says which.
        CHECK(summary.at("enum_depth_completed").get<int>() < 10);
    }
}

TEST_CASE("logdist at depth zero reports all-zero lower bounds") {
    const std::filesystem::path base = scratch_file("ld0");
    const RunResult r = run_cli("logdist " + model_arg("two_state.json") + " --depth 0 --out " +
                                base.string());
    REQUIRE(r.code == 0);
    const std::string zero =
        "x,y\n"
        "0.000000000000,0.000000000000\n"
        "0.000000000000,0.000000000000\n";
    CHECK(slurp(base.string() + ".enum.csv") == zero);
    CHECK(slurp(base.string() + ".witness.csv") == zero);
}

TEST_CASE("logdist without --out streams the CSVs to stdout and the summary to stderr") {
    const RunResult r = run_cli("logdist " + model_arg("two_state.json"));
    REQUIRE(r.code == 0);
    CHECK(r.out.substr(0, 4) == "x,y\n");
    CHECK(r.out.find("x,y\n", 4) != std::string::npos);
    const json summary = json::parse(r.err);
    CHECK(summary.at("depth").get<int>() == 4);
}

TEST_CASE("selftest passes on the default seed and reports per-suite counts") {
    const RunResult r = run_cli("selftest");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "duality: 100/100"));
    CHECK(contains(r.out, "metric-axioms: 20/20"));
    CHECK(contains(r.out, "fixpoint-residual: 10/10"));
    CHECK(contains(r.out, "nonexpansive-ops: 6/6"));
    CHECK(contains(r.out, "pair-approximation: 100/100"));
    CHECK(contains(r.out, "certificates: 10/10"));
    CHECK(contains(r.out, "selftest: PASS (seed 1)"));

    const RunResult other = run_cli("selftest --seed 7");
    CHECK(other.code == 0);
}

TEST_CASE("selftest with tolerance zero demonstrates failure reporting") {
    const RunResult r = run_cli("selftest --tol 0");
    CHECK(r.code == 3);
    CHECK(contains(r.out, "selftest: FAIL"));
    CHECK(contains(r.out, "duality gap"));
    CHECK(contains(r.out, "residual"));
}

TEST_CASE("selftest output is byte-identical for a fixed seed") {
    const RunResult a = run_cli("selftest --seed 9");
    const RunResult b = run_cli("selftest --seed 9");
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
}

TEST_CASE("argument errors exit with code two and help exits clean") {
    CHECK(run_cli("bisim " + model_arg("two_state.json") + " --frobnicate").code == 2);
    CHECK(run_cli("bisim").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("eval --help").code == 0);
    CHECK(run_cli("eval " + model_arg("no_such.json") + " --formula T").code == 1);
}
