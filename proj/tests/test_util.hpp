#pragma once

#include <cmath>
#include <vector>

#include "sorq/exact.hpp"
#include "sorq/mdp.hpp"
#include "sorq/rng.hpp"

namespace sorq::testutil {

// 1-state, 1-action MDP: p = 1, fixed reward. V* = r / (1 - alpha).
inline Mdp single_state(double reward = 1.0, double alpha = 0.9) {
  return make_mdp(1, 1, {1.0}, {reward}, alpha);
}

// 2-state deterministic cycle with constant reward on every action.
inline Mdp two_state_cycle(double reward = 1.0, double alpha = 0.9) {
  // state 0 -> 1, state 1 -> 0
  return make_mdp(2, 1, {0.0, 1.0, 1.0, 0.0}, {reward, reward, reward, reward}, alpha);
}

inline QTable random_qtable(int states, int actions, SplitMix64& rng, double lo = -5.0,
                            double hi = 5.0) {
  QTable q(states, actions);
  for (double& x : q.values) x = lo + rng.next_double() * (hi - lo);
  return q;
}

// Iterative policy evaluation: v <- r_pi + alpha P_pi v. Independent of the
// solvers under test (no Bellman operator reuse).
inline ValueFunction policy_evaluation(const Mdp& mdp, const Policy& pi, double tol = 1e-12,
                                       int max_iter = 1000000) {
  ValueFunction v(mdp.num_states, 0.0);
  for (int it = 0; it < max_iter; ++it) {
    ValueFunction next(mdp.num_states, 0.0);
    double res = 0.0;
    for (int i = 0; i < mdp.num_states; ++i) {
      double acc = 0.0;
      for (int j = 0; j < mdp.num_states; ++j) {
        acc += mdp.p(i, pi[i], j) * (mdp.r(i, pi[i], j) + mdp.discount * v[j]);
      }
      next[i] = acc;
      res = std::max(res, std::abs(next[i] - v[i]));
    }
    v = std::move(next);
    if (res <= tol) break;
  }
  return v;
}

}  // namespace sorq::testutil
