// Acceptance gate: ten independently derived checks, each printed as one
// pass/fail line. The binary exits nonzero if any check fails. Tolerances are
// pinned here on purpose; loosening them is a behavior change, not a fix.

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
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
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

std::vector<std::pair<std::string, Mdp>> corpus() {
    const std::array<const char*, 4> names = {"two_state.json", "three_chain.json",
                                              "two_action.json", "bisimilar.json"};
    std::vector<std::pair<std::string, Mdp>> out;
    for (const char* n : names) {
        out.emplace_back(n, load_model(std::string(BISIMET_DATA_DIR) + "/" + n));
    }
    return out;
}

/// Two-state reward process with unit reward gap and self-loop dynamics; its
/// fixpoint metric is 1 and the iterates follow d_{n+1} = c*d_n + (1-c).
Mdp unit_gap_loop() {
    return make_mrp({"x", "y"}, {dirac(0, 2), dirac(1, 2)}, (Vec(2) << 1.0, 0.0).finished());
}

int failures = 0;

void criterion(int id, const std::string& what,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << " — " << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++failures;
}

}  // namespace

int main() {
    criterion(1, "primal and dual transport values agree within 1e-6 on 500 random instances",
              [](std::string& detail) {
                  const auto t0 = Clock::now();
                  Rng rng(101);
                  Scalar worst = 0.0;
                  for (int i = 0; i < 500; ++i) {
                      const Eigen::Index n = 2 + (i % 7);
                      const PMetric d = random_pmetric(rng, n);
                      const Dist mu = random_dist(rng, n);
                      const Dist nu = random_dist(rng, n);
                      worst = std::max(worst, duality_gap(d, mu, nu));
                  }
                  const double secs = seconds_since(t0);
                  detail = "max gap " + fmt(worst) + ", " + fmt(secs) + "s";
                  return worst <= 1e-6 && secs <= 30.0;
              });

    criterion(2, "two-state self-loop iterates equal 1 - c^n and the fixpoint equals 1",
              [](std::string& detail) {
                  const Mdp m = unit_gap_loop();
                  Scalar worst_iterate = 0.0;
                  Scalar worst_fix = 0.0;
                  for (Scalar c : {0.0, 0.3, 0.5, 0.9}) {
                      const DiscountConfig cfg(c);
                      Scalar local = 0.0;
                      const FixpointReport r = bisim_metric(
                          m, cfg, 1e-9, 0, [&](int it, const PMetric& d) {
                              local = std::max(
                                  local, std::abs(d(0, 1) - (1.0 - std::pow(c, it))));
                          });
                      worst_iterate = std::max(worst_iterate, local);
                      worst_fix = std::max(worst_fix, std::abs(r.metric(0, 1) - 1.0));
                  }
                  detail = "iterate error " + fmt(worst_iterate) + ", fixpoint error " +
                           fmt(worst_fix);
                  return worst_iterate <= 1e-9 && worst_fix <= 10.0 * 1e-9;
              });

    criterion(3, "every depth-4 formula gap stays within 1e-6 of the fixpoint metric on "
                 "100 random models",
              [](std::string& detail) {
                  const auto t0 = Clock::now();
                  Rng rng(303);
                  const DiscountConfig c(0.5);
                  Scalar worst = -1.0;
                  std::size_t total_formulas = 0;
                  for (int i = 0; i < 100; ++i) {
                      const Mdp m = random_mdp(rng, 2 + (i % 5), 1 + (i % 3));
                      const PMetric d = bisim_metric(m, c).metric;
                      const std::vector<Formula> fs =
                          enumerate_formulas(m, c, 4, default_scalar_grid());
                      total_formulas += fs.size();
                      const PMetric ld = logical_distance(fs, m, c);
                      worst = std::max(worst, (ld.values() - d.values()).maxCoeff());
                  }
                  const double secs = seconds_since(t0);
                  detail = fmt(static_cast<double>(total_formulas)) +
                           " formulas, worst excess " + fmt(worst) + ", " + fmt(secs) + "s";
                  return worst <= 1e-6 && secs <= 300.0;
              });

    criterion(4, "depth-10 witness formulas realize the fixpoint metric within 1e-2 on "
                 "25 random models",
              [](std::string& detail) {
                  Rng rng(404);
                  const DiscountConfig c(0.5);
                  const int depth =
                      static_cast<int>(std::ceil(std::log(1e-3) / std::log(0.5)));
                  Scalar worst_short = 0.0;
                  for (int i = 0; i < 25; ++i) {
                      const Mdp m = random_mdp(rng, 2 + (i % 4), 1 + (i % 2));
                      const PMetric d = bisim_metric(m, c).metric;
                      const WitnessSet ws = expressivity_witnesses(m, c, depth, 1e-5);
                      worst_short =
                          std::max(worst_short, (d.values() - ws.achieved).maxCoeff());
                  }
                  detail = "depth " + std::to_string(depth) + ", worst shortfall " +
                           fmt(worst_short);
                  return worst_short <= 1e-2;
              });

    criterion(5, "every fixpoint iterate on every bundled model is a valid pseudometric",
              [](std::string& detail) {
                  std::size_t iterates = 0;
                  bool all_ok = true;
                  for (const auto& [name, m] : corpus()) {
                      for (Scalar c : {0.0, 0.5, 0.9, 1.0}) {
                          bisim_metric(m, DiscountConfig(c), 1e-9, 0,
                                       [&](int, const PMetric& d) {
                                           ++iterates;
                                           try {
                                               validate_pmetric(d.values());
                                           } catch (const Error&) {
                                               all_ok = false;
                                           }
                                       });
                      }
                  }
                  detail = std::to_string(iterates) + " iterates checked";
                  return all_ok && iterates > 0;
              });

    criterion(6, "transport cost over the chain (1 - 2^-i) * d reaches the limit value "
                 "within 1e-6 by i = 40",
              [](std::string& detail) {
                  Rng rng(606);
                  Scalar worst = 0.0;
                  for (int k = 0; k < 100; ++k) {
                      const Eigen::Index n = 2 + (k % 7);
                      const PMetric d = random_pmetric(rng, n);
                      const Dist mu = random_dist(rng, n);
                      const Dist nu = random_dist(rng, n);
                      const Scalar limit = wasserstein_primal(d, mu, nu).value;
                      Scalar sup = 0.0;
                      for (int i = 1; i <= 40; ++i) {
                          const Scalar s = 1.0 - std::ldexp(1.0, -i);
                          const PMetric di = PMetric::unchecked(s * d.values());
                          sup = std::max(sup, wasserstein_primal(di, mu, nu).value);
                      }
                      worst = std::max(worst, std::abs(limit - sup));
                  }
                  detail = "worst gap " + fmt(worst);
                  return worst <= 1e-6;
              });

    criterion(7, "extremal discounts: c=0 stops after one step at the reward gap, c=1 "
                 "ignores rewards",
              [](std::string& detail) {
                  Rng rng(707);
                  Scalar worst0 = 0.0;
                  Scalar worst1 = 0.0;
                  bool one_step = true;
                  for (int i = 0; i < 10; ++i) {
                      const Mdp m = random_mdp(rng, 2 + (i % 5), 1 + (i % 3));
                      const Eigen::Index n = m.n_states();

                      const FixpointReport r0 = bisim_metric(m, DiscountConfig(0.0));
                      one_step = one_step && r0.iterations == 1 && r0.converged;
                      for (StateId x = 0; x < n; ++x) {
                          for (StateId y = 0; y < n; ++y) {
                              Scalar gap = 0.0;
                              for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                                  gap = std::max(gap,
                                                 std::abs(m.reward(a, x) - m.reward(a, y)));
                              }
                              worst0 = std::max(worst0, std::abs(r0.metric(x, y) - gap));
                          }
                      }

                      // Same dynamics, freshly rolled rewards: at c = 1 the
                      // metric may not move.
                      std::vector<Mdp::Arm> arms;
                      for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                          std::vector<Dist> rows;
                          for (StateId x = 0; x < n; ++x) rows.push_back(m.kernel(a, x));
                          arms.push_back({m.action_id(a).label, std::move(rows),
                                          random_predicate(rng, n)});
                      }
                      const Mdp rerolled(m.state_names(), std::move(arms));
                      const PMetric d1 = bisim_metric(m, DiscountConfig(1.0)).metric;
                      const PMetric d2 = bisim_metric(rerolled, DiscountConfig(1.0)).metric;
                      worst1 = std::max(worst1,
                                        (d1.values() - d2.values()).cwiseAbs().maxCoeff());
                  }
                  detail = "c=0 error " + fmt(worst0) + ", c=1 reward sensitivity " +
                           fmt(worst1);
                  return one_step && worst0 <= 1e-12 && worst1 <= 1e-9;
              });

    criterion(8, "truncated addition breaks nonexpansiveness while every core operator "
                 "keeps it",
              [](std::string& detail) {
                  // The explicit witness: arguments (0.5, 0.5) and (0.4, 0.4)
                  // differ by 0.1 in each slot, yet the truncated sums 1.0
                  // and 0.8 differ by 0.2.
                  const Scalar plus_gap =
                      std::abs(std::min(1.0, 0.5 + 0.5) - std::min(1.0, 0.4 + 0.4));
                  const bool witness_values = plus_gap > 0.1;

                  // The same witness at the formula level: a two-state
                  // single-action reward process with rewards 0.5 and 0.4 at
                  // c = 0 has metric 0.1, but plus(dia(a,T), dia(a,T)) opens
                  // a 0.2 value gap.
                  const Mdp m = make_mrp({"x", "y"}, {dirac(0, 2), dirac(1, 2)},
                                         (Vec(2) << 0.5, 0.4).finished());
                  const DiscountConfig zero(0.0);
                  const Formula probe = Formula::dia(m.action_id(0), Formula::top());
                  const Formula f = Formula::plus(probe, probe);
                  const Vec v = eval_formula(f, m, zero);
                  const Scalar d01 = bisim_metric(m, zero).metric(0, 1);
                  const bool witness_formula = std::abs(v(0) - v(1)) > d01 + 1e-6;

                  Rng rng(808);
                  Scalar worst = 0.0;
                  for (int i = 0; i < 10000; ++i) {
                      const Scalar u1 = rng.uniform01(), u2 = rng.uniform01();
                      const Scalar v1 = rng.uniform01(), v2 = rng.uniform01();
                      const Scalar r = rng.uniform01();
                      const Scalar in_gap =
                          std::max(std::abs(u1 - u2), std::abs(v1 - v2));
                      const Scalar outs[6] = {
                          std::abs((1.0 - u1) - (1.0 - u2)),
                          std::abs(std::min(u1, v1) - std::min(u2, v2)),
                          std::abs(std::min(1.0, u1 + r) - std::min(1.0, u2 + r)),
                          std::abs(std::max(0.0, u1 - r) - std::max(0.0, u2 - r)),
                          std::abs(r * u1 - r * u2),
                          std::abs((r * u1 + (1 - r) * v1) - (r * u2 + (1 - r) * v2)),
                      };
                      for (Scalar out : outs) worst = std::max(worst, out - in_gap);
                  }
                  // The modality contracts by the discount weight: check the
                  // expectation step that drives it.
                  Rng rng2(809);
                  for (int i = 0; i < 10000; ++i) {
                      const Eigen::Index n = 2 + (i % 5);
                      const Dist mu = random_dist(rng2, n);
                      const Vec u = random_predicate(rng2, n);
                      const Vec w = random_predicate(rng2, n);
                      const Scalar out = std::abs(expectation(u, mu) - expectation(w, mu));
                      worst = std::max(worst, out - (u - w).cwiseAbs().maxCoeff());
                  }
                  detail = "plus gap " + fmt(plus_gap) + ", worst operator excess " +
                           fmt(worst);
                  return witness_values && witness_formula && worst <= 1e-12;
              });

    criterion(9, "1000 constructed pair approximations hit the target exactly at y and "
                 "within epsilon below it at x",
              [](std::string& detail) {
                  Rng rng(909);
                  const Scalar eps = 1e-4;
                  Scalar worst_y = 0.0;
                  Scalar worst_lo = 0.0;  // most negative h(x) - psi(x)
                  Scalar worst_hi = 0.0;  // largest h(x) - psi(x)
                  for (int i = 0; i < 1000; ++i) {
                      const Eigen::Index n = 2 + (i % 4);
                      Predicate h = random_predicate(rng, n);
                      // Raw draws are dyadics on the 2^-53 grid, where the
                      // reconstruction at x is exact; scaling by 1/3 moves
                      // every other target off the grid so the one-sided
                      // rounding guard is exercised too.
                      if (i % 2 == 1) h /= 3.0;
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
                      const Formula witness =
                          Formula::dia(m.action_id(0), Formula::top());
                      const Formula psi = approximate_at_pair(h, x, y, witness, eps, m, zero);
                      const Vec v = eval_formula(psi, m, zero);
                      worst_y = std::max(worst_y, std::abs(v(y) - h(y)));
                      worst_lo = std::min(worst_lo, h(x) - v(x));
                      worst_hi = std::max(worst_hi, h(x) - v(x));
                  }
                  detail = "y error " + fmt(worst_y) + ", x shortfall range [" +
                           fmt(worst_lo) + ", " + fmt(worst_hi) + "]";
                  return worst_y <= 1e-12 && worst_lo >= 0.0 && worst_hi < eps;
              });

    criterion(10, "the certificate accepts each bundled model's fixpoint and rejects the "
                  "zero metric",
              [](std::string& detail) {
                  const DiscountConfig c(0.5);
                  bool all_ok = true;
                  int models = 0;
                  for (const auto& [name, m] : corpus()) {
                      // Reward-discriminating models only: with all rewards
                      // equal the zero metric would itself be the fixpoint.
                      bool distinct = false;
                      for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
                          const Vec& r = m.rewards(a);
                          distinct = distinct || (r.maxCoeff() - r.minCoeff()) > 1e-12;
                      }
                      if (!distinct) continue;
                      ++models;
                      const PMetric fix = bisim_metric(m, c).metric;
                      const bool accepts = certify_upper_bound(m, c, fix);
                      const bool rejects =
                          !certify_upper_bound(m, c, zero_pmetric(m.n_states()));
                      if (!(accepts && rejects)) {
                          all_ok = false;
                          detail += name + " ";
                      }
                  }
                  if (all_ok) detail = std::to_string(models) + " models";
                  return all_ok && models == 4;
              });

    if (failures == 0) {
        std::cout << "acceptance: all 10 criteria passed" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << failures << " criterion(s) failed" << std::endl;
    return 1;
}
