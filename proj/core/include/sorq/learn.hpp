#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sorq/mdp.hpp"

namespace sorq {

enum class Algorithm { standard_q, sor_q };

struct StepSchedule {
  enum class Kind { polynomial, constant };
  Kind kind = Kind::polynomial;
  double c0 = 1.0;
  double exponent = 0.85;  // in (0.5, 1] for the Robbins-Monro conditions
};

// Polynomial: min(1, c0 / (visit_count + 1)^exponent); constant: min(1, c0).
double step_size(const StepSchedule& schedule, long visit_count);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::standard_q;
  double w = 1.0;  // ignored for standard_q
  StepSchedule schedule;
  long total_steps = 100000;
  std::uint64_t seed = 0;
  long record_every = 1000;
  double initial_q = 0.0;
};

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
};

struct LearnerState {
  QTable q;
  std::vector<long> visit_counts;  // row-major (state, action)
  int current_state = 0;
  long steps_done = 0;

  long visits(int i, int a) const {
    return visit_counts[static_cast<std::size_t>(i) * q.num_actions + a];
  }
};

struct ErrorTrace {
  std::vector<long> steps;
  std::vector<double> errors;  // max-norm gap to the oracle value function
};

// Uniform random action; consumes exactly one uniform variate.
int behavior_next_action(int num_actions, SplitMix64& rng);

// q(i,a) <- q(i,a) + gamma * (r + discount * max_b q(j,b) - q(i,a)).
// Modifies exactly one cell.
void q_learning_step(QTable& q, const Transition& t, double gamma, double discount);

// d = w (r + discount * max_b q(j,b)) + (1-w) max_c q(i,c) - q(i,a);
// q(i,a) <- q(i,a) + gamma * d. Bit-identical to q_learning_step when w = 1.
void sor_q_learning_step(QTable& q, const Transition& t, double gamma, double w, double discount);

// Simulates one continuous trajectory from state 0 under the uniform behavior
// policy, with per-(i,a) visit-count step sizes. Records
// ||oracle_v - max_a q(.,a)||_inf at step 0 and every record_every steps.
// Deterministic given cfg.seed.
std::pair<LearnerState, ErrorTrace> run_learner(const Mdp& mdp, const LearnerConfig& cfg,
                                                const ValueFunction& oracle_v);

}  // namespace sorq
