#include "sorq/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sorq/exact.hpp"

namespace sorq {

namespace {

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ArmRun {
  std::vector<double> errors;
  double final_error = 0.0;
  int policy_mismatch = 0;
  bool clamped = false;
};

struct InstanceResult {
  std::uint64_t instance_seed = 0;
  double w_star_value = 0.0;
  std::vector<ArmRun> arms;
};

}  // namespace

WSpec WSpec::parse(const std::string& text) {
  WSpec spec;
  if (text == "w_star") {
    spec.kind = Kind::w_star;
  } else if (text == "w_mid") {
    spec.kind = Kind::w_mid;
  } else {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid w value '" + text + "'");
    }
    if (pos != text.size() || !(v > 0.0)) {
      throw std::invalid_argument("invalid w value '" + text + "'");
    }
    spec.kind = Kind::numeric;
    spec.value = v;
  }
  return spec;
}

std::string WSpec::str() const {
  switch (kind) {
    case Kind::w_star:
      return "w_star";
    case Kind::w_mid:
      return "w_mid";
    default:
      return format17(value);
  }
}

double WSpec::resolve(double instance_w_star) const {
  double w;
  switch (kind) {
    case Kind::w_star:
      w = instance_w_star;
      break;
    case Kind::w_mid:
      w = (1.0 + instance_w_star) / 2.0;
      break;
    default:
      w = value;
  }
  return w > instance_w_star ? instance_w_star : w;
}

double average_error(const std::vector<double>& errors_per_mdp) {
  if (errors_per_mdp.empty()) throw std::invalid_argument("average_error: empty list");
  double sum = 0.0;
  for (double e : errors_per_mdp) sum += e;
  return sum / static_cast<double>(errors_per_mdp.size());
}

std::vector<std::vector<int>> optimal_action_sets(const QTable& oracle_q, double tol) {
  std::vector<std::vector<int>> sets(oracle_q.num_states);
  for (int i = 0; i < oracle_q.num_states; ++i) {
    const double m = oracle_q.row_max(i);
    for (int a = 0; a < oracle_q.num_actions; ++a) {
      if (oracle_q.at(i, a) >= m - 2.0 * tol) sets[i].push_back(a);
    }
  }
  return sets;
}

int policy_difference(const QTable& learned_q,
                      const std::vector<std::vector<int>>& optimal_action_sets) {
  if (static_cast<int>(optimal_action_sets.size()) != learned_q.num_states) {
    throw std::invalid_argument("policy_difference: shape mismatch");
  }
  const Policy pi = greedy_policy(learned_q);
  int mismatches = 0;
  for (int i = 0; i < learned_q.num_states; ++i) {
    bool found = false;
    for (int a : optimal_action_sets[i]) {
      if (a == pi[i]) {
        found = true;
        break;
      }
    }
    if (!found) ++mismatches;
  }
  return mismatches;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.num_mdps < 1) throw std::invalid_argument("num_mdps must be >= 1");
  if (cfg.arms.empty()) throw std::invalid_argument("experiment needs at least one arm");

  const int n = cfg.num_mdps;
  std::vector<InstanceResult> results(n);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);

  auto run_instance = [&](int m) {
    InstanceResult& out = results[m];
    out.instance_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(m));

    GeneratorConfig gen = cfg.generator;
    gen.seed = out.instance_seed;
    const Mdp mdp = generate_random_mdp(gen);

    const QSolveResult oracle = q_value_iteration(mdp, 1.0, cfg.oracle_tol, cfg.oracle_max_iter);
    ValueFunction vstar(mdp.num_states);
    for (int i = 0; i < mdp.num_states; ++i) vstar[i] = oracle.q.row_max(i);
    const auto opt_sets = optimal_action_sets(oracle.q, cfg.oracle_tol);
    out.w_star_value = w_star(mdp);

    const std::uint64_t learner_seed = derive_seed(out.instance_seed, 1);
    out.arms.resize(cfg.arms.size());
    std::vector<long> first_visit_counts;
    for (std::size_t k = 0; k < cfg.arms.size(); ++k) {
      const Arm& arm = cfg.arms[k];
      LearnerConfig lc = cfg.learner;
      lc.algorithm = arm.algorithm;
      lc.seed = learner_seed;
      if (arm.algorithm == Algorithm::sor_q) {
        const double raw = arm.w.resolve(out.w_star_value);
        out.arms[k].clamped =
            arm.w.kind == WSpec::Kind::numeric && arm.w.value > out.w_star_value;
        lc.w = raw;
      } else {
        lc.w = 1.0;
      }
      auto [state, trace] = run_learner(mdp, lc, vstar);
      out.arms[k].errors = std::move(trace.errors);
      out.arms[k].final_error = out.arms[k].errors.back();
      out.arms[k].policy_mismatch = policy_difference(state.q, opt_sets);
      // Paired sample paths: every arm must have consumed the identical
      // (action, transition) sequence.
      if (k == 0) {
        first_visit_counts = state.visit_counts;
      } else if (state.visit_counts != first_visit_counts) {
        throw std::logic_error("paired-path invariant violated: visit counts differ across arms");
      }
    }
  };

  auto worker = [&] {
    for (;;) {
      const int m = next.fetch_add(1);
      if (m >= n) return;
      try {
        run_instance(m);
      } catch (...) {
        errors[m] = std::current_exception();
      }
    }
  };

  const int jobs = cfg.jobs > 1 ? (cfg.jobs < n ? cfg.jobs : n) : 1;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int m = 0; m < n; ++m) {
    if (errors[m]) {
      try {
        std::rethrow_exception(errors[m]);
      } catch (const std::exception& e) {
        throw std::runtime_error("instance " + std::to_string(m) + " (seed " +
                                 std::to_string(derive_seed(cfg.master_seed, m)) +
                                 ") failed: " + e.what());
      }
    }
  }

  ExperimentSummary summary;
  const long record_every = cfg.learner.record_every;
  const std::size_t n_records = results[0].arms[0].errors.size();
  summary.steps.resize(n_records);
  for (std::size_t k = 0; k < n_records; ++k) {
    summary.steps[k] = static_cast<long>(k) * record_every;
  }

  for (std::size_t k = 0; k < cfg.arms.size(); ++k) {
    ArmSummary as;
    as.arm = cfg.arms[k].name();
    as.w_label = cfg.arms[k].algorithm == Algorithm::standard_q ? "1" : cfg.arms[k].w.str();
    as.avg_curve.assign(n_records, 0.0);
    double mismatch_sum = 0.0;
    for (int m = 0; m < n; ++m) {
      const ArmRun& run = results[m].arms[k];
      for (std::size_t r = 0; r < n_records; ++r) as.avg_curve[r] += run.errors[r];
      mismatch_sum += run.policy_mismatch;
      if (run.clamped) ++as.clamped_instances;
      summary.per_mdp.push_back({m, results[m].instance_seed, results[m].w_star_value,
                                 cfg.arms[k].label(), run.final_error, run.policy_mismatch});
    }
    for (double& e : as.avg_curve) e /= static_cast<double>(n);
    as.final_avg_error = as.avg_curve.back();
    as.avg_policy_difference = mismatch_sum / static_cast<double>(n);
    summary.arms.push_back(std::move(as));
  }
  return summary;
}

std::vector<std::pair<WSpec, std::vector<double>>> w_sweep(const ExperimentConfig& cfg,
                                                           const std::vector<WSpec>& w_values) {
  if (w_values.empty()) throw std::invalid_argument("w_sweep: empty w list");
  ExperimentConfig sweep_cfg = cfg;
  sweep_cfg.arms.clear();
  for (const WSpec& w : w_values) sweep_cfg.arms.push_back({Algorithm::sor_q, w});
  const ExperimentSummary summary = run_experiment(sweep_cfg);
  std::vector<std::pair<WSpec, std::vector<double>>> out;
  for (std::size_t k = 0; k < w_values.size(); ++k) {
    out.emplace_back(w_values[k], summary.arms[k].avg_curve);
  }
  return out;
}

void write_experiment_csvs(const ExperimentSummary& summary, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);

  {
    std::ofstream out(dir / "error_curves.csv");
    if (!out) throw std::runtime_error("cannot write error_curves.csv");
    out << "arm,w,step,avg_error\n";
    for (const ArmSummary& as : summary.arms) {
      for (std::size_t r = 0; r < summary.steps.size(); ++r) {
        out << as.arm << ',' << as.w_label << ',' << summary.steps[r] << ','
            << format17(as.avg_curve[r]) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "per_mdp.csv");
    if (!out) throw std::runtime_error("cannot write per_mdp.csv");
    out << "mdp_index,instance_seed,w_star,arm,final_error,policy_mismatch\n";
    for (const PerMdpRecord& rec : summary.per_mdp) {
      out << rec.mdp_index << ',' << rec.instance_seed << ',' << format17(rec.w_star) << ','
          << rec.arm << ',' << format17(rec.final_error) << ',' << rec.policy_mismatch << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw std::runtime_error("cannot write summary.csv");
    out << "arm,w,final_avg_error,avg_policy_difference\n";
    for (const ArmSummary& as : summary.arms) {
      out << as.arm << ',' << as.w_label << ',' << format17(as.final_avg_error) << ','
          << format17(as.avg_policy_difference) << '\n';
    }
  }
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;

  auto parse_double = [&](const std::string& value) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected a number, got '" + value + "'");
    }
    if (pos != value.size()) throw ParseError(lineno, "trailing characters in number '" + value + "'");
    return v;
  };
  auto parse_long = [&](const std::string& value) {
    std::size_t pos = 0;
    long v;
    try {
      v = std::stol(value, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected an integer, got '" + value + "'");
    }
    if (pos != value.size()) throw ParseError(lineno, "trailing characters in integer '" + value + "'");
    return v;
  };
  auto parse_u64 = [&](const std::string& value) {
    std::size_t pos = 0;
    unsigned long long v;
    try {
      v = std::stoull(value, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected an unsigned integer, got '" + value + "'");
    }
    if (pos != value.size()) throw ParseError(lineno, "trailing characters in integer '" + value + "'");
    return static_cast<std::uint64_t>(v);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (value.empty()) throw ParseError(lineno, "empty value for key '" + key + "'");

    if (key == "num_mdps") {
      cfg.num_mdps = static_cast<int>(parse_long(value));
    } else if (key == "master_seed") {
      cfg.master_seed = parse_u64(value);
    } else if (key == "oracle_tol") {
      cfg.oracle_tol = parse_double(value);
    } else if (key == "oracle_max_iter") {
      cfg.oracle_max_iter = parse_long(value);
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_long(value));
    } else if (key == "generator.num_states") {
      cfg.generator.num_states = static_cast<int>(parse_long(value));
    } else if (key == "generator.num_actions") {
      cfg.generator.num_actions = static_cast<int>(parse_long(value));
    } else if (key == "generator.discount") {
      cfg.generator.discount = parse_double(value);
    } else if (key == "generator.min_self_loop") {
      cfg.generator.min_self_loop = parse_double(value);
    } else if (key == "generator.reward_low") {
      cfg.generator.reward_low = parse_double(value);
    } else if (key == "generator.reward_high") {
      cfg.generator.reward_high = parse_double(value);
    } else if (key == "learner.total_steps") {
      cfg.learner.total_steps = parse_long(value);
    } else if (key == "learner.record_every") {
      cfg.learner.record_every = parse_long(value);
    } else if (key == "learner.c0") {
      cfg.learner.schedule.c0 = parse_double(value);
    } else if (key == "learner.exponent") {
      cfg.learner.schedule.exponent = parse_double(value);
    } else if (key == "learner.schedule") {
      if (value == "polynomial") {
        cfg.learner.schedule.kind = StepSchedule::Kind::polynomial;
      } else if (value == "constant") {
        cfg.learner.schedule.kind = StepSchedule::Kind::constant;
      } else {
        throw ParseError(lineno, "learner.schedule must be 'polynomial' or 'constant'");
      }
    } else if (key == "learner.initial_q") {
      cfg.learner.initial_q = parse_double(value);
    } else if (key == "arms") {
      cfg.arms.clear();
      std::istringstream toks(value);
      std::string tok;
      while (std::getline(toks, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        if (tok == "q") {
          cfg.arms.push_back({Algorithm::standard_q, {}});
        } else if (tok.rfind("sorq@", 0) == 0) {
          try {
            cfg.arms.push_back({Algorithm::sor_q, WSpec::parse(tok.substr(5))});
          } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
          }
        } else {
          throw ParseError(lineno, "unknown arm '" + tok + "' (expected 'q' or 'sorq@<w>')");
        }
      }
      if (cfg.arms.empty()) throw ParseError(lineno, "arms list is empty");
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_experiment_config(in);
}

}  // namespace sorq
