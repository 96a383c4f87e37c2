#include "sorq/exact.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sorq {

namespace {

constexpr double kWSlack = 1e-12;

void check_w(const Mdp& mdp, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("relaxation factor must be positive");
  const double ws = w_star(mdp);
  if (w > ws + kWSlack) {
    throw std::invalid_argument("relaxation factor " + std::to_string(w) + " exceeds w* = " +
                                std::to_string(ws));
  }
}

double action_value(const Mdp& mdp, const ValueFunction& v, int i, int a) {
  const std::size_t off = mdp.row_offset(i, a);
  double ev = 0.0;
  double exp_r = 0.0;
  for (int j = 0; j < mdp.num_states; ++j) {
    exp_r += mdp.transition[off + j] * mdp.reward[off + j];
    ev += mdp.transition[off + j] * v[j];
  }
  return exp_r + mdp.discount * ev;
}

}  // namespace

double w_star(const Mdp& mdp) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const double cand = 1.0 / (1.0 - mdp.discount * mdp.p(i, a, i));
      if (cand < best) best = cand;
    }
  }
  return best;
}

ValueFunction bellman_T(const Mdp& mdp, const ValueFunction& v) {
  if (static_cast<int>(v.size()) != mdp.num_states) {
    throw std::invalid_argument("value function length does not match num_states");
  }
  ValueFunction out(mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) {
    double best = action_value(mdp, v, i, 0);
    for (int a = 1; a < mdp.num_actions; ++a) {
      const double q = action_value(mdp, v, i, a);
      if (q > best) best = q;
    }
    out[i] = best;
  }
  return out;
}

ValueFunction sor_bellman_Tw(const Mdp& mdp, const ValueFunction& v, double w) {
  if (static_cast<int>(v.size()) != mdp.num_states) {
    throw std::invalid_argument("value function length does not match num_states");
  }
  check_w(mdp, w);
  if (w == 1.0) return bellman_T(mdp, v);
  ValueFunction out(mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) {
    double best = w * action_value(mdp, v, i, 0) + (1.0 - w) * v[i];
    for (int a = 1; a < mdp.num_actions; ++a) {
      const double q = w * action_value(mdp, v, i, a) + (1.0 - w) * v[i];
      if (q > best) best = q;
    }
    out[i] = best;
  }
  return out;
}

QTable q_bellman_H(const Mdp& mdp, const QTable& q) {
  if (q.num_states != mdp.num_states || q.num_actions != mdp.num_actions) {
    throw std::invalid_argument("Q-table shape does not match MDP");
  }
  QTable out(mdp.num_states, mdp.num_actions);
  std::vector<double> vmax(mdp.num_states);
  for (int j = 0; j < mdp.num_states; ++j) vmax[j] = q.row_max(j);
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const std::size_t off = mdp.row_offset(i, a);
      double exp_r = 0.0;
      double ev = 0.0;
      for (int j = 0; j < mdp.num_states; ++j) {
        exp_r += mdp.transition[off + j] * mdp.reward[off + j];
        ev += mdp.transition[off + j] * vmax[j];
      }
      out.at(i, a) = exp_r + mdp.discount * ev;
    }
  }
  return out;
}

QTable sor_q_bellman_Hw(const Mdp& mdp, const QTable& q, double w) {
  if (q.num_states != mdp.num_states || q.num_actions != mdp.num_actions) {
    throw std::invalid_argument("Q-table shape does not match MDP");
  }
  check_w(mdp, w);
  if (w == 1.0) return q_bellman_H(mdp, q);
  QTable out(mdp.num_states, mdp.num_actions);
  std::vector<double> vmax(mdp.num_states);
  for (int j = 0; j < mdp.num_states; ++j) vmax[j] = q.row_max(j);
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const std::size_t off = mdp.row_offset(i, a);
      double exp_r = 0.0;
      double ev = 0.0;
      for (int j = 0; j < mdp.num_states; ++j) {
        exp_r += mdp.transition[off + j] * mdp.reward[off + j];
        ev += mdp.transition[off + j] * vmax[j];
      }
      out.at(i, a) = w * (exp_r + mdp.discount * ev) + (1.0 - w) * vmax[i];
    }
  }
  return out;
}

VSolveResult value_iteration(const Mdp& mdp, double w, const ValueFunction& v0, double tol,
                             long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_w(mdp, w);
  VSolveResult res;
  res.v = v0.empty() ? ValueFunction(mdp.num_states, 0.0) : v0;
  while (res.iterations < max_iter) {
    ValueFunction next = sor_bellman_Tw(mdp, res.v, w);
    res.final_residual = max_abs_diff(next, res.v);
    res.v = std::move(next);
    ++res.iterations;
    if (res.final_residual <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

QSolveResult q_value_iteration(const Mdp& mdp, double w, double tol, long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_w(mdp, w);
  QSolveResult res;
  res.q = QTable(mdp.num_states, mdp.num_actions, 0.0);
  while (res.iterations < max_iter) {
    QTable next = sor_q_bellman_Hw(mdp, res.q, w);
    res.final_residual = max_abs_diff(next, res.q);
    res.q = std::move(next);
    ++res.iterations;
    if (res.final_residual <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Policy greedy_policy(const QTable& q) {
  Policy pi(q.num_states, 0);
  for (int i = 0; i < q.num_states; ++i) {
    int best = 0;
    for (int a = 1; a < q.num_actions; ++a) {
      if (q.at(i, a) > q.at(i, best)) best = a;
    }
    pi[i] = best;
  }
  return pi;
}

double max_abs_diff(const ValueFunction& x, const ValueFunction& y) {
  if (x.size() != y.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = std::abs(x[k] - y[k]);
    if (d > m) m = d;
  }
  return m;
}

double max_abs_diff(const QTable& x, const QTable& y) {
  if (x.num_states != y.num_states || x.num_actions != y.num_actions) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  return max_abs_diff(x.values, y.values);
}

}  // namespace sorq
