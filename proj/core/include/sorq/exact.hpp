#pragma once

#include "sorq/mdp.hpp"

namespace sorq {

// Largest admissible relaxation factor: min over (i,a) of 1/(1 - alpha * p(i|i,a)).
// Always >= 1; equals 1 when some self-loop probability is 0.
double w_star(const Mdp& mdp);

// (TV)(i) = max_a { r(i,a) + alpha * sum_j p(j|i,a) v(j) }
ValueFunction bellman_T(const Mdp& mdp, const ValueFunction& v);

// (T_w V)(i) = max_a { w (r(i,a) + alpha sum_j p(j|i,a) v(j)) + (1-w) v(i) }
// Requires 0 < w <= w_star(mdp).
ValueFunction sor_bellman_Tw(const Mdp& mdp, const ValueFunction& v, double w);

// (HQ)(i,a) = r(i,a) + alpha * sum_j p(j|i,a) max_b q(j,b)
QTable q_bellman_H(const Mdp& mdp, const QTable& q);

// (H_w Q)(i,a) = w (r(i,a) + alpha sum_j p(j|i,a) max_b Q(j,b)) + (1-w) max_c Q(i,c)
// Max-norm contraction with factor (w*alpha + 1 - w) for 0 < w <= w_star.
QTable sor_q_bellman_Hw(const Mdp& mdp, const QTable& q, double w);

struct VSolveResult {
  ValueFunction v;
  long iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

struct QSolveResult {
  QTable q;
  long iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

// Iterates v <- T_w v until the successive-iterate max-norm residual is <= tol
// or max_iter is hit. For any 0 < w <= w_star the limit is V*.
VSolveResult value_iteration(const Mdp& mdp, double w, const ValueFunction& v0, double tol,
                             long max_iter);

// Fixed-point iteration on H_w from q0 = 0. Limit is Q*, the unique fixed
// point of H_w.
QSolveResult q_value_iteration(const Mdp& mdp, double w, double tol, long max_iter);

// pi(i) = argmax_a q(i,a), ties broken by lowest action index.
Policy greedy_policy(const QTable& q);

double max_abs_diff(const ValueFunction& x, const ValueFunction& y);
double max_abs_diff(const QTable& x, const QTable& y);

}  // namespace sorq
