#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sorq/exact.hpp"
#include "sorq/experiments.hpp"
#include "sorq/learn.hpp"
#include "sorq/mdp.hpp"
#include "sorq/version.hpp"

namespace {

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Every command writes its manifest before any computation starts.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out) throw std::runtime_error("manifest write failed: " + path);
}

double resolve_w(const std::string& text, const sorq::Mdp& mdp) {
  if (text == "w_star") return sorq::w_star(mdp);
  if (text == "w_mid") return (1.0 + sorq::w_star(mdp)) / 2.0;
  std::size_t pos = 0;
  const double w = std::stod(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("invalid w value '" + text + "'");
  return w;
}

int default_jobs() {
  if (const char* env = std::getenv("SORQ_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

void write_trace_csv(const std::string& path, const sorq::ErrorTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,error\n";
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    out << trace.steps[k] << ',' << format17(trace.errors[k]) << '\n';
  }
}

void write_qtable_csv(const std::string& path, const sorq::QTable& q) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "state,action,value\n";
  for (int i = 0; i < q.num_states; ++i) {
    for (int a = 0; a < q.num_actions; ++a) {
      out << i << ',' << a << ',' << format17(q.at(i, a)) << '\n';
    }
  }
}

int cmd_generate(const sorq::GeneratorConfig& cfg, const std::string& out_path) {
  write_manifest(out_path + ".manifest",
                 {{"# command", "generate"},
                  {"# version", sorq::kVersion},
                  {"# out", out_path},
                  {"generator.num_states", std::to_string(cfg.num_states)},
                  {"generator.num_actions", std::to_string(cfg.num_actions)},
                  {"generator.discount", format17(cfg.discount)},
                  {"generator.min_self_loop", format17(cfg.min_self_loop)},
                  {"generator.reward_low", format17(cfg.reward_low)},
                  {"generator.reward_high", format17(cfg.reward_high)},
                  {"master_seed", std::to_string(cfg.seed)}});
  const sorq::Mdp mdp = sorq::generate_random_mdp(cfg);
  sorq::write_mdp(mdp, out_path);
  std::cout << "w_star = " << format17(sorq::w_star(mdp)) << '\n';
  return 0;
}

int cmd_solve(const std::string& mdp_path, const std::string& w_text, double tol, long max_iter,
              const std::string& mode, const std::string& out_path) {
  write_manifest(out_path + ".manifest",
                 {{"# command", "solve"},
                  {"# version", sorq::kVersion},
                  {"# out", out_path},
                  {"mdp", mdp_path},
                  {"w", w_text},
                  {"tol", format17(tol)},
                  {"max_iter", std::to_string(max_iter)},
                  {"mode", mode}});
  const sorq::Mdp mdp = sorq::read_mdp(mdp_path);
  const double w = resolve_w(w_text, mdp);

  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
  if (mode == "q") {
    const sorq::QSolveResult res = sorq::q_value_iteration(mdp, w, tol, max_iter);
    iterations = res.iterations;
    residual = res.final_residual;
    converged = res.converged;
    write_qtable_csv(out_path, res.q);
  } else {
    const sorq::VSolveResult res = sorq::value_iteration(
        mdp, w, sorq::ValueFunction(mdp.num_states, 0.0), tol, max_iter);
    iterations = res.iterations;
    residual = res.final_residual;
    converged = res.converged;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "state,value\n";
    for (int i = 0; i < mdp.num_states; ++i) out << i << ',' << format17(res.v[i]) << '\n';
  }
  std::cout << "w = " << format17(w) << " iterations = " << iterations
            << " residual = " << format17(residual) << " converged = " << (converged ? 1 : 0)
            << '\n';
  return 0;
}

int cmd_learn(const std::string& mdp_path, const std::string& algo, const std::string& w_text,
              long steps, double c0, double theta, std::uint64_t seed, long record_every,
              double initial_q, const std::string& out_path, std::string q_out_path) {
  if (q_out_path.empty()) q_out_path = out_path + ".q.csv";
  write_manifest(out_path + ".manifest",
                 {{"# command", "learn"},
                  {"# version", sorq::kVersion},
                  {"# out", out_path},
                  {"# q_out", q_out_path},
                  {"mdp", mdp_path},
                  {"algo", algo},
                  {"w", w_text},
                  {"learner.total_steps", std::to_string(steps)},
                  {"learner.c0", format17(c0)},
                  {"learner.exponent", format17(theta)},
                  {"learner.record_every", std::to_string(record_every)},
                  {"learner.initial_q", format17(initial_q)},
                  {"master_seed", std::to_string(seed)}});

  const sorq::Mdp mdp = sorq::read_mdp(mdp_path);
  const sorq::QSolveResult oracle = sorq::q_value_iteration(mdp, 1.0, 1e-8, 1000000);
  sorq::ValueFunction vstar(mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) vstar[i] = oracle.q.row_max(i);

  sorq::LearnerConfig cfg;
  cfg.algorithm = algo == "sorq" ? sorq::Algorithm::sor_q : sorq::Algorithm::standard_q;
  cfg.w = cfg.algorithm == sorq::Algorithm::sor_q ? resolve_w(w_text, mdp) : 1.0;
  cfg.schedule.c0 = c0;
  cfg.schedule.exponent = theta;
  cfg.total_steps = steps;
  cfg.seed = seed;
  cfg.record_every = record_every;
  cfg.initial_q = initial_q;

  const auto [state, trace] = sorq::run_learner(mdp, cfg, vstar);
  write_trace_csv(out_path, trace);
  write_qtable_csv(q_out_path, state.q);
  std::cout << "final_error = " << format17(trace.errors.back()) << '\n';
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, int jobs_flag) {
  sorq::ExperimentConfig cfg = sorq::load_experiment_config(config_path);
  if (jobs_flag > 0) cfg.jobs = jobs_flag;

  std::filesystem::create_directories(out_dir);
  std::ostringstream arms;
  for (std::size_t k = 0; k < cfg.arms.size(); ++k) {
    if (k) arms << ", ";
    arms << cfg.arms[k].label();
  }
  write_manifest((std::filesystem::path(out_dir) / "manifest.txt").string(),
                 {{"# command", "experiment"},
                  {"# version", sorq::kVersion},
                  {"# out", out_dir},
                  {"num_mdps", std::to_string(cfg.num_mdps)},
                  {"master_seed", std::to_string(cfg.master_seed)},
                  {"oracle_tol", format17(cfg.oracle_tol)},
                  {"oracle_max_iter", std::to_string(cfg.oracle_max_iter)},
                  {"jobs", std::to_string(cfg.jobs)},
                  {"generator.num_states", std::to_string(cfg.generator.num_states)},
                  {"generator.num_actions", std::to_string(cfg.generator.num_actions)},
                  {"generator.discount", format17(cfg.generator.discount)},
                  {"generator.min_self_loop", format17(cfg.generator.min_self_loop)},
                  {"generator.reward_low", format17(cfg.generator.reward_low)},
                  {"generator.reward_high", format17(cfg.generator.reward_high)},
                  {"learner.total_steps", std::to_string(cfg.learner.total_steps)},
                  {"learner.record_every", std::to_string(cfg.learner.record_every)},
                  {"learner.schedule",
                   cfg.learner.schedule.kind == sorq::StepSchedule::Kind::polynomial
                       ? "polynomial"
                       : "constant"},
                  {"learner.c0", format17(cfg.learner.schedule.c0)},
                  {"learner.exponent", format17(cfg.learner.schedule.exponent)},
                  {"learner.initial_q", format17(cfg.learner.initial_q)},
                  {"arms", arms.str()}});

  const sorq::ExperimentSummary summary = sorq::run_experiment(cfg);
  sorq::write_experiment_csvs(summary, out_dir);
  for (const sorq::ArmSummary& as : summary.arms) {
    std::cout << as.arm << " w=" << as.w_label
              << " final_avg_error=" << format17(as.final_avg_error)
              << " avg_policy_difference=" << format17(as.avg_policy_difference);
    if (as.clamped_instances > 0) std::cout << " clamped_instances=" << as.clamped_instances;
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular MDP toolkit: SOR Q-learning, exact solvers, experiments"};
  app.set_version_flag("--version", sorq::kVersion);
  app.require_subcommand(1);

  // generate
  sorq::GeneratorConfig gen;
  std::string gen_out = "mdp.txt";
  auto* generate = app.add_subcommand("generate", "Generate a random MDP and print its w*");
  generate->add_option("--states", gen.num_states, "Number of states");
  generate->add_option("--actions", gen.num_actions, "Number of actions");
  generate->add_option("--discount", gen.discount, "Discount factor in [0,1)");
  generate->add_option("--min-self-loop", gen.min_self_loop, "Self-loop probability floor");
  generate->add_option("--reward-low", gen.reward_low, "Reward range lower bound");
  generate->add_option("--reward-high", gen.reward_high, "Reward range upper bound");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output MDP file");

  // solve
  std::string solve_mdp, solve_w = "1", solve_mode = "v", solve_out = "solution.csv";
  double solve_tol = 1e-8;
  long solve_max_iter = 1000000;
  auto* solve = app.add_subcommand("solve", "Solve an MDP exactly by (SOR) value iteration");
  solve->add_option("--mdp", solve_mdp, "MDP file")->required();
  solve->add_option("--w", solve_w, "Relaxation factor: a number or 'w_star'");
  solve->add_option("--tol", solve_tol, "Residual tolerance");
  solve->add_option("--max-iter", solve_max_iter, "Iteration budget");
  solve->add_option("--mode", solve_mode, "'v' for V*, 'q' for Q*")
      ->check(CLI::IsMember({"v", "q"}));
  solve->add_option("--out", solve_out, "Output CSV");

  // learn
  std::string learn_mdp, learn_algo = "q", learn_w = "1", learn_out = "trace.csv", learn_q_out;
  long learn_steps = 100000, learn_record = 1000;
  double learn_c0 = 1.0, learn_theta = 0.85, learn_q0 = 0.0;
  std::uint64_t learn_seed = 0;
  auto* learn = app.add_subcommand("learn", "Run a single learner and write its error trace");
  learn->add_option("--mdp", learn_mdp, "MDP file")->required();
  learn->add_option("--algo", learn_algo, "'q' or 'sorq'")->check(CLI::IsMember({"q", "sorq"}));
  learn->add_option("--w", learn_w, "Relaxation factor: a number, 'w_star' or 'w_mid'");
  learn->add_option("--steps", learn_steps, "Number of learning steps");
  learn->add_option("--c0", learn_c0, "Step-size numerator");
  learn->add_option("--theta", learn_theta, "Step-size exponent in (0.5,1]");
  learn->add_option("--seed", learn_seed, "Run seed");
  learn->add_option("--record-every", learn_record, "Error-trace stride");
  learn->add_option("--initial-q", learn_q0, "Initial Q fill value");
  learn->add_option("--out", learn_out, "Trace CSV path");
  learn->add_option("--q-out", learn_q_out, "Final-Q CSV path (default <out>.q.csv)");

  // experiment
  std::string exp_config, exp_out = "experiment_out";
  int exp_jobs = default_jobs();
  auto* experiment = app.add_subcommand("experiment", "Run a batch experiment from a config file");
  experiment->add_option("--config", exp_config, "key = value config file")->required();
  experiment->add_option("--out", exp_out, "Output directory");
  experiment->add_option("--jobs", exp_jobs, "Concurrent MDP instances (env SORQ_JOBS)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(gen, gen_out);
    if (solve->parsed())
      return cmd_solve(solve_mdp, solve_w, solve_tol, solve_max_iter, solve_mode, solve_out);
    if (learn->parsed())
      return cmd_learn(learn_mdp, learn_algo, learn_w, learn_steps, learn_c0, learn_theta,
                       learn_seed, learn_record, learn_q0, learn_out, learn_q_out);
    if (experiment->parsed()) return cmd_experiment(exp_config, exp_out, exp_jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
