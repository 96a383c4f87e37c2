#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sorq/learn.hpp"
#include "sorq/mdp.hpp"

namespace sorq {

// Relaxation-factor specifier: a literal value, or a token resolved per MDP
// instance ("w_star", or "w_mid" = (1 + w*)/2).
struct WSpec {
  enum class Kind { numeric, w_star, w_mid };
  Kind kind = Kind::numeric;
  double value = 1.0;

  static WSpec parse(const std::string& text);  // throws std::invalid_argument
  std::string str() const;
  // Values above the instance's w* are clamped to it.
  double resolve(double instance_w_star) const;
};

struct Arm {
  Algorithm algorithm = Algorithm::standard_q;
  WSpec w;  // "1" for standard_q

  std::string name() const { return algorithm == Algorithm::standard_q ? "q" : "sorq"; }
  std::string label() const {
    return algorithm == Algorithm::standard_q ? name() : name() + "@" + w.str();
  }
};

struct ExperimentConfig {
  int num_mdps = 100;
  GeneratorConfig generator;  // seed field is overridden per instance
  LearnerConfig learner;      // algorithm/w/seed fields are overridden per arm
  std::vector<Arm> arms = {{Algorithm::standard_q, {}},
                           {Algorithm::sor_q, {WSpec::Kind::w_star, 0.0}}};
  std::uint64_t master_seed = 0;
  double oracle_tol = 1e-8;
  long oracle_max_iter = 1000000;
  int jobs = 1;
};

struct ArmSummary {
  std::string arm;      // "q" or "sorq"
  std::string w_label;  // the w specifier as text
  std::vector<double> avg_curve;
  double final_avg_error = 0.0;
  double avg_policy_difference = 0.0;
  int clamped_instances = 0;
};

struct PerMdpRecord {
  int mdp_index = 0;
  std::uint64_t instance_seed = 0;
  double w_star = 0.0;
  std::string arm;
  double final_error = 0.0;
  int policy_mismatch = 0;
};

struct ExperimentSummary {
  std::vector<long> steps;  // record points, shared across arms
  std::vector<ArmSummary> arms;
  std::vector<PerMdpRecord> per_mdp;
};

// Arithmetic mean; throws std::invalid_argument on an empty list.
double average_error(const std::vector<double>& errors_per_mdp);

// Count of states whose greedy learned action (lowest-index tie-break) is not
// in the state's optimal-action set.
int policy_difference(const QTable& learned_q,
                      const std::vector<std::vector<int>>& optimal_action_sets);

// Actions within 2*tol of the row max of the oracle Q-table.
std::vector<std::vector<int>> optimal_action_sets(const QTable& oracle_q, double tol);

// Generates cfg.num_mdps seeded MDPs, solves each exactly, runs every arm on
// identical sample paths per instance, and aggregates average error curves in
// ascending instance order. Deterministic given cfg; instances may run on up
// to cfg.jobs threads.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

// One averaged error curve per w value (SOR arms on identical sample paths).
std::vector<std::pair<WSpec, std::vector<double>>> w_sweep(const ExperimentConfig& cfg,
                                                           const std::vector<WSpec>& w_values);

// Writes error_curves.csv, per_mdp.csv, summary.csv into out_dir.
void write_experiment_csvs(const ExperimentSummary& summary, const std::string& out_dir);

// Line-oriented `key = value` config with `#` comments and dotted keys.
// Throws ParseError naming the offending line.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace sorq
