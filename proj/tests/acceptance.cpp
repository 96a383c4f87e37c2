// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "sorq/exact.hpp"
#include "sorq/experiments.hpp"
#include "sorq/learn.hpp"
#include "sorq/mdp.hpp"

using namespace sorq;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool passed, const std::string& detail = "") {
  std::printf("%s criterion %d: %s%s%s\n", passed ? "PASS" : "FAIL", index, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!passed) ++g_failures;
}

QTable random_qtable(int states, int actions, SplitMix64& rng, double lo = -5.0, double hi = 5.0) {
  QTable q(states, actions);
  for (double& x : q.values) x = lo + rng.next_double() * (hi - lo);
  return q;
}

int experiment_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 8 ? 8 : (hw > 0 ? static_cast<int>(hw) : 1);
}

ExperimentConfig paper_protocol(std::uint64_t master_seed) {
  ExperimentConfig cfg;  // defaults: 100 MDPs, 10 states, 5 actions, alpha 0.9,
                         // self-loop floor 0.05, 1e5 steps
  cfg.master_seed = master_seed;
  cfg.jobs = experiment_jobs();
  return cfg;
}

// 1. ||H_w P - H_w Q|| <= (w a + 1 - w) ||P - Q|| over >= 1000 random triples.
void criterion_contraction() {
  SplitMix64 rng(11);
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50 && ok; ++seed) {
    GeneratorConfig gcfg;
    gcfg.seed = seed;
    const Mdp mdp = generate_random_mdp(gcfg);
    const double ws = w_star(mdp);
    for (int trial = 0; trial < 20; ++trial) {
      const QTable p = random_qtable(10, 5, rng);
      const QTable q = random_qtable(10, 5, rng);
      double w = rng.next_double() * ws;
      if (w <= 0.0) w = ws;
      const double factor = w * mdp.discount + 1.0 - w;
      const double lhs = max_abs_diff(sor_q_bellman_Hw(mdp, p, w), sor_q_bellman_Hw(mdp, q, w));
      const double excess = lhs - factor * max_abs_diff(p, q);
      worst = std::max(worst, excess);
      if (excess > 1e-12) ok = false;
    }
  }
  report(1, "H_w contraction bound over 1000 random (P,Q,w) triples", ok,
         "max excess " + std::to_string(worst));
}

// 2. |max a - max b| <= max |a - b| for >= 1e4 random sequence pairs.
void criterion_max_inequality() {
  SplitMix64 rng(22);
  bool ok = true;
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    const int len = 1 + static_cast<int>(rng.next_double() * 30);
    double ma = -1e300, mb = -1e300, mdiff = 0.0;
    for (int k = 0; k < len; ++k) {
      const double a = -100.0 + 200.0 * rng.next_double();
      const double b = -100.0 + 200.0 * rng.next_double();
      ma = std::max(ma, a);
      mb = std::max(mb, b);
      mdiff = std::max(mdiff, std::abs(a - b));
    }
    if (std::abs(ma - mb) > mdiff) ok = false;
  }
  report(2, "max-difference inequality over 10^4 random sequence pairs", ok);
}

// 3. Fixed points of H and H_w agree at optimal actions; max_a Q* = V*.
void criterion_fixed_point_agreement() {
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorConfig gcfg;
    gcfg.seed = seed + 1000;
    const Mdp mdp = generate_random_mdp(gcfg);
    const QSolveResult q1 = q_value_iteration(mdp, 1.0, 1e-10, 1000000);
    const QSolveResult qw = q_value_iteration(mdp, w_star(mdp), 1e-10, 1000000);
    const VSolveResult v = value_iteration(mdp, 1.0, {}, 1e-10, 1000000);
    if (!q1.converged || !qw.converged || !v.converged) {
      ok = false;
      break;
    }
    for (int i = 0; i < mdp.num_states; ++i) {
      int c = 0;
      for (int a = 1; a < mdp.num_actions; ++a) {
        if (q1.q.at(i, a) > q1.q.at(i, c)) c = a;
      }
      worst = std::max(worst, std::abs(qw.q.at(i, c) - q1.q.at(i, c)));
      worst = std::max(worst, std::abs(qw.q.row_max(i) - v.v[i]));
    }
  }
  ok = ok && worst <= 1e-8;
  report(3, "fixed-point agreement of H and H_w on 20 seeded MDPs", ok,
         "max deviation " + std::to_string(worst));
}

// 4. Q-value iteration at w* uses <= iterations of w = 1; strictly fewer on >= 90%.
void criterion_iteration_ordering() {
  int never_more = 0;
  int strictly_fewer = 0;
  const int n = 100;
  for (int m = 0; m < n; ++m) {
    GeneratorConfig gcfg;
    gcfg.seed = 2000 + static_cast<std::uint64_t>(m);
    const Mdp mdp = generate_random_mdp(gcfg);
    const long it1 = q_value_iteration(mdp, 1.0, 1e-8, 1000000).iterations;
    const long itw = q_value_iteration(mdp, w_star(mdp), 1e-8, 1000000).iterations;
    if (itw <= it1) ++never_more;
    if (itw < it1) ++strictly_fewer;
  }
  const bool ok = never_more == n && strictly_fewer >= 90;
  report(4, "SOR Q-value iteration speed-up ordering on 100 seeded MDPs", ok,
         std::to_string(never_more) + "/100 no worse, " + std::to_string(strictly_fewer) +
             "/100 strictly fewer");
}

// 5. SOR with w = 1 is byte-identical to standard Q-learning over 1e5 steps.
void criterion_w1_reduction() {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 10 && ok; ++seed) {
    GeneratorConfig gcfg;
    gcfg.seed = 3000 + seed;
    const Mdp mdp = generate_random_mdp(gcfg);
    const QSolveResult oracle = q_value_iteration(mdp, 1.0, 1e-8, 1000000);
    ValueFunction vstar(mdp.num_states);
    for (int i = 0; i < mdp.num_states; ++i) vstar[i] = oracle.q.row_max(i);

    LearnerConfig a;
    a.algorithm = Algorithm::standard_q;
    a.total_steps = 100000;
    a.seed = derive_seed(seed, 7);
    a.record_every = 100;
    LearnerConfig b = a;
    b.algorithm = Algorithm::sor_q;
    b.w = 1.0;
    const auto [sa, ta] = run_learner(mdp, a, vstar);
    const auto [sb, tb] = run_learner(mdp, b, vstar);
    if (std::memcmp(sa.q.values.data(), sb.q.values.data(),
                    sa.q.values.size() * sizeof(double)) != 0 ||
        ta.errors != tb.errors || sa.visit_counts != sb.visit_counts) {
      ok = false;
    }
  }
  report(5, "w=1 SOR Q-learning is byte-identical to standard Q-learning, 10 seeds", ok);
}

// 6-7. Paper-protocol experiment: decreasing average error; SOR beats
// standard Q-learning on final error and policy difference for 3 seeds.
void criteria_experiment_direction() {
  bool decreasing_ok = true;
  double final_ratio = 0.0;
  bool direction_ok = true;
  std::string detail7;

  for (std::uint64_t master_seed : {1ull, 2ull, 3ull}) {
    const ExperimentConfig cfg = paper_protocol(master_seed);
    const ExperimentSummary summary = run_experiment(cfg);
    const ArmSummary& q_arm = summary.arms[0];
    const ArmSummary& sor_arm = summary.arms[1];

    if (master_seed == 1) {
      // monotone trend: quarter-means of the SOR curve are non-increasing
      const auto& curve = sor_arm.avg_curve;
      const std::size_t quarter = curve.size() / 4;
      double prev = 1e300;
      for (int part = 0; part < 4; ++part) {
        const std::size_t lo = part * quarter;
        const std::size_t hi = part == 3 ? curve.size() : (part + 1) * quarter;
        double mean = 0.0;
        for (std::size_t k = lo; k < hi; ++k) mean += curve[k];
        mean /= static_cast<double>(hi - lo);
        if (mean > prev) decreasing_ok = false;
        prev = mean;
      }
      final_ratio = curve.back() / curve.front();
      if (!(final_ratio < 0.25)) decreasing_ok = false;
    }

    if (!(sor_arm.final_avg_error < q_arm.final_avg_error) ||
        !(sor_arm.avg_policy_difference <= q_arm.avg_policy_difference)) {
      direction_ok = false;
    }
    detail7 += "seed " + std::to_string(master_seed) + ": sorq " +
               std::to_string(sor_arm.final_avg_error) + "/" +
               std::to_string(sor_arm.avg_policy_difference) + " vs q " +
               std::to_string(q_arm.final_avg_error) + "/" +
               std::to_string(q_arm.avg_policy_difference) + "; ";
  }

  report(6, "paper-protocol average error decreases to < 25% of its initial value",
         decreasing_ok, "final/initial = " + std::to_string(final_ratio));
  report(7, "SOR Q-learning beats standard Q-learning on error and policy difference, 3 seeds",
         direction_ok, detail7);
}

// 8. w-sweep over {1, (1 + w*)/2, w*}: final average errors non-increasing in w.
void criterion_w_sweep() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t master_seed : {1ull, 2ull, 3ull}) {
    ExperimentConfig cfg = paper_protocol(master_seed);
    const auto curves =
        w_sweep(cfg, {WSpec::parse("1"), WSpec::parse("w_mid"), WSpec::parse("w_star")});
    double prev = 1e300;
    detail += "seed " + std::to_string(master_seed) + ":";
    for (const auto& [w, curve] : curves) {
      const double final_error = curve.back();
      detail += " " + w.str() + "=" + std::to_string(final_error);
      if (final_error > prev) ok = false;
      prev = final_error;
    }
    detail += "; ";
  }
  report(8, "w-sweep final errors non-increasing in w, 3 seeds", ok, detail);
}

// 9. Single-state oracle: both learners reach |q - 10| < 0.05.
void criterion_learner_oracle() {
  const Mdp mdp = make_mdp(1, 1, {1.0}, {1.0}, 0.9);
  const ValueFunction vstar{10.0};

  LearnerConfig std_cfg;
  std_cfg.schedule.exponent = 0.7;
  std_cfg.total_steps = 100000;
  std_cfg.record_every = 100000;
  const auto [std_state, std_trace] = run_learner(mdp, std_cfg, vstar);
  const bool std_ok = std::abs(std_state.q.at(0, 0) - 10.0) < 0.05;

  LearnerConfig sor_cfg;
  sor_cfg.algorithm = Algorithm::sor_q;
  sor_cfg.w = 10.0;
  sor_cfg.total_steps = 1000;
  sor_cfg.record_every = 1000;
  const auto [sor_state, sor_trace] = run_learner(mdp, sor_cfg, vstar);
  const bool sor_ok = std::abs(sor_state.q.at(0, 0) - 10.0) < 0.05;

  report(9, "learners reach 1/(1-alpha) on the single-state model", std_ok && sor_ok,
         "q after 1e5 steps: " + std::to_string(std_state.q.at(0, 0)) +
             ", sorq after 1e3 steps: " + std::to_string(sor_state.q.at(0, 0)));
}

// 10. Model-exact E[d] equals (H_w q)(i,a) - q(i,a); zero at q = Q*.
void criterion_unbiasedness() {
  bool ok = true;
  double worst_identity = 0.0;
  double worst_fixed = 0.0;
  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    GeneratorConfig gcfg;
    gcfg.seed = 4000 + static_cast<std::uint64_t>(trial);
    const Mdp mdp = generate_random_mdp(gcfg);
    const double w = w_star(mdp);
    const QTable q = random_qtable(10, 5, rng);
    const QTable hq = sor_q_bellman_Hw(mdp, q, w);
    for (int i = 0; i < mdp.num_states; ++i) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        double expected_d = 0.0;
        for (int j = 0; j < mdp.num_states; ++j) {
          expected_d += mdp.p(i, a, j) * (w * (mdp.r(i, a, j) + mdp.discount * q.row_max(j)) +
                                          (1.0 - w) * q.row_max(i) - q.at(i, a));
        }
        worst_identity = std::max(worst_identity, std::abs(expected_d - (hq.at(i, a) - q.at(i, a))));
      }
    }
    if (trial < 10) {  // fixed-point check on a subset; solves dominate runtime
      const QSolveResult sol = q_value_iteration(mdp, w, 1e-10, 1000000);
      const QTable hq_star = sor_q_bellman_Hw(mdp, sol.q, w);
      for (std::size_t k = 0; k < sol.q.values.size(); ++k) {
        worst_fixed = std::max(worst_fixed, std::abs(hq_star.values[k] - sol.q.values[k]));
      }
    }
  }
  ok = worst_identity <= 1e-12 && worst_fixed <= 1e-8;
  report(10, "model-exact expected increment identity and fixed-point unbiasedness", ok,
         "identity " + std::to_string(worst_identity) + ", at Q* " + std::to_string(worst_fixed));
}

}  // namespace

int main() {
  criterion_contraction();
  criterion_max_inequality();
  criterion_fixed_point_agreement();
  criterion_iteration_ordering();
  criterion_w1_reduction();
  criteria_experiment_direction();
  criterion_w_sweep();
  criterion_learner_oracle();
  criterion_unbiasedness();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
