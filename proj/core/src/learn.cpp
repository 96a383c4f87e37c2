#include "sorq/learn.hpp"

#include <cmath>
#include <stdexcept>

#include "sorq/exact.hpp"

namespace sorq {

double step_size(const StepSchedule& schedule, long visit_count) {
  if (visit_count < 0) throw std::invalid_argument("visit_count must be non-negative");
  double gamma;
  if (schedule.kind == StepSchedule::Kind::constant) {
    gamma = schedule.c0;
  } else {
    gamma = schedule.c0 / std::pow(static_cast<double>(visit_count) + 1.0, schedule.exponent);
  }
  return gamma < 1.0 ? gamma : 1.0;
}

int behavior_next_action(int num_actions, SplitMix64& rng) {
  int a = static_cast<int>(rng.next_double() * num_actions);
  return a < num_actions ? a : num_actions - 1;
}

void q_learning_step(QTable& q, const Transition& t, double gamma, double discount) {
  const double target = t.reward + discount * q.row_max(t.next_state);
  double& cell = q.at(t.state, t.action);
  cell = cell + gamma * (target - cell);
}

void sor_q_learning_step(QTable& q, const Transition& t, double gamma, double w,
                         double discount) {
  const double target = t.reward + discount * q.row_max(t.next_state);
  const double d = w * target + (1.0 - w) * q.row_max(t.state) - q.at(t.state, t.action);
  q.at(t.state, t.action) += gamma * d;
}

std::pair<LearnerState, ErrorTrace> run_learner(const Mdp& mdp, const LearnerConfig& cfg,
                                                const ValueFunction& oracle_v) {
  if (cfg.total_steps < 0) throw std::invalid_argument("total_steps must be non-negative");
  if (cfg.record_every <= 0) throw std::invalid_argument("record_every must be positive");
  if (static_cast<int>(oracle_v.size()) != mdp.num_states) {
    throw std::invalid_argument("oracle value function length does not match num_states");
  }
  if (cfg.algorithm == Algorithm::sor_q) {
    const double ws = w_star(mdp);
    if (!(cfg.w > 0.0) || cfg.w > ws + 1e-12) {
      throw std::invalid_argument("relaxation factor " + std::to_string(cfg.w) +
                                  " outside (0, w*] with w* = " + std::to_string(ws));
    }
  }

  LearnerState st;
  st.q = QTable(mdp.num_states, mdp.num_actions, cfg.initial_q);
  st.visit_counts.assign(st.q.values.size(), 0);
  st.current_state = 0;
  st.steps_done = 0;

  SplitMix64 rng(cfg.seed);

  auto current_error = [&] {
    double m = 0.0;
    for (int i = 0; i < mdp.num_states; ++i) {
      const double d = std::abs(oracle_v[i] - st.q.row_max(i));
      if (d > m) m = d;
    }
    return m;
  };

  ErrorTrace trace;
  trace.steps.push_back(0);
  trace.errors.push_back(current_error());

  for (long step = 1; step <= cfg.total_steps; ++step) {
    const int i = st.current_state;
    const int a = behavior_next_action(mdp.num_actions, rng);
    const auto [j, r] = sample_transition(mdp, i, a, rng);
    long& count = st.visit_counts[static_cast<std::size_t>(i) * mdp.num_actions + a];
    const double gamma = step_size(cfg.schedule, count);
    const Transition t{i, a, r, j};
    if (cfg.algorithm == Algorithm::sor_q) {
      sor_q_learning_step(st.q, t, gamma, cfg.w, mdp.discount);
    } else {
      q_learning_step(st.q, t, gamma, mdp.discount);
    }
    ++count;
    st.current_state = j;
    ++st.steps_done;
    if (step % cfg.record_every == 0) {
      trace.steps.push_back(step);
      trace.errors.push_back(current_error());
    }
  }
  return {std::move(st), std::move(trace)};
}

}  // namespace sorq
