#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sorq/rng.hpp"

namespace sorq {

using ValueFunction = std::vector<double>;
using Policy = std::vector<int>;

// Real-valued table over (state, action) pairs, row-major.
struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(int states, int actions, double fill = 0.0)
      : num_states(states),
        num_actions(actions),
        values(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions), fill) {}

  double& at(int i, int a) {
    return values[static_cast<std::size_t>(i) * num_actions + a];
  }
  double at(int i, int a) const {
    return values[static_cast<std::size_t>(i) * num_actions + a];
  }

  double row_max(int i) const {
    double m = at(i, 0);
    for (int a = 1; a < num_actions; ++a) {
      if (at(i, a) > m) m = at(i, a);
    }
    return m;
  }
};

// Finite discounted MDP with dense transition and reward tensors.
// Immutable after construction; safe to share across threads.
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> transition;  // p(j|i,a), index ((i*A)+a)*M + j
  std::vector<double> reward;      // r(i,a,j), same layout
  double discount = 0.0;
  double reward_bound = 0.0;  // max |r(i,a,j)|, fixed at construction

  std::size_t row_offset(int i, int a) const {
    return (static_cast<std::size_t>(i) * num_actions + a) * num_states;
  }
  double p(int i, int a, int j) const { return transition[row_offset(i, a) + j]; }
  double r(int i, int a, int j) const { return reward[row_offset(i, a) + j]; }
};

// Builds an Mdp and records the reward bound. Throws std::invalid_argument
// on shape mismatch.
Mdp make_mdp(int num_states, int num_actions, std::vector<double> transition,
             std::vector<double> reward, double discount);

struct ValidationIssue {
  int state = -1;   // -1 when the issue is not tied to a row
  int action = -1;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  bool self_loop_positive = true;  // informational: p(i|i,a) > 0 for all (i,a)
  std::vector<ValidationIssue> issues;
};

ValidationReport validate(const Mdp& mdp);

struct GeneratorConfig {
  int num_states = 10;
  int num_actions = 5;
  double discount = 0.9;
  double min_self_loop = 0.05;
  double reward_low = -1.0;
  double reward_high = 1.0;
  std::uint64_t seed = 0;
};

// Deterministic function of the config. Each transition row is a normalized
// vector of uniform variates mixed with a self-loop floor, so
// p(i|i,a) >= min_self_loop. Rewards are uniform on [reward_low, reward_high].
Mdp generate_random_mdp(const GeneratorConfig& cfg);

// r(i,a) = sum_j p(j|i,a) r(i,a,j)
double expected_reward(const Mdp& mdp, int i, int a);

// Inverse-CDF draw over the row in index order; consumes exactly one
// uniform variate. Returns (next state, r(i,a,next state)).
std::pair<int, double> sample_transition(const Mdp& mdp, int i, int a, SplitMix64& rng);

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport rep);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

void write_mdp(const Mdp& mdp, const std::string& path);

// Throws ParseError on malformed input, ValidationError when the parsed
// model fails validation.
Mdp read_mdp(const std::string& path);

}  // namespace sorq
