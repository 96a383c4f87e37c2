#include "sorq/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sorq {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Mdp make_mdp(int num_states, int num_actions, std::vector<double> transition,
             std::vector<double> reward, double discount) {
  if (num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("num_states and num_actions must be positive");
  }
  const std::size_t expected = static_cast<std::size_t>(num_states) * num_actions * num_states;
  if (transition.size() != expected || reward.size() != expected) {
    throw std::invalid_argument("tensor size does not match num_states * num_actions * num_states");
  }
  Mdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.transition = std::move(transition);
  mdp.reward = std::move(reward);
  mdp.discount = discount;
  double bound = 0.0;
  for (double x : mdp.reward) {
    if (std::abs(x) > bound) bound = std::abs(x);
  }
  mdp.reward_bound = bound;
  return mdp;
}

ValidationReport validate(const Mdp& mdp) {
  ValidationReport rep;
  if (!(mdp.discount >= 0.0 && mdp.discount < 1.0)) {
    rep.ok = false;
    rep.issues.push_back({-1, -1, "discount " + format17(mdp.discount) + " outside [0,1)"});
  }
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      double sum = 0.0;
      bool row_ok = true;
      for (int j = 0; j < mdp.num_states; ++j) {
        const double pj = mdp.p(i, a, j);
        const double rj = mdp.r(i, a, j);
        if (!std::isfinite(pj) || !std::isfinite(rj)) {
          rep.ok = false;
          row_ok = false;
          rep.issues.push_back({i, a, "non-finite entry in row (" + std::to_string(i) + "," +
                                          std::to_string(a) + ")"});
          break;
        }
        if (pj < 0.0) {
          rep.ok = false;
          row_ok = false;
          rep.issues.push_back({i, a, "negative probability in row (" + std::to_string(i) + "," +
                                          std::to_string(a) + ")"});
          break;
        }
        sum += pj;
      }
      if (row_ok && std::abs(sum - 1.0) > kRowSumTol) {
        rep.ok = false;
        rep.issues.push_back({i, a, "row (" + std::to_string(i) + "," + std::to_string(a) +
                                        ") sums to " + format17(sum)});
      }
      if (!(mdp.p(i, a, i) > 0.0)) rep.self_loop_positive = false;
    }
  }
  return rep;
}

Mdp generate_random_mdp(const GeneratorConfig& cfg) {
  if (cfg.num_states <= 0 || cfg.num_actions <= 0) {
    throw std::invalid_argument("generator: num_states and num_actions must be positive");
  }
  if (!(cfg.discount >= 0.0 && cfg.discount < 1.0)) {
    throw std::invalid_argument("generator: discount must be in [0,1)");
  }
  if (!(cfg.min_self_loop >= 0.0 && cfg.min_self_loop < 1.0)) {
    throw std::invalid_argument("generator: min_self_loop must be in [0,1)");
  }
  if (cfg.reward_low > cfg.reward_high) {
    throw std::invalid_argument("generator: reward_low must be <= reward_high");
  }

  const int M = cfg.num_states;
  const int A = cfg.num_actions;
  SplitMix64 rng(cfg.seed);

  std::vector<double> transition(static_cast<std::size_t>(M) * A * M);
  std::vector<double> reward(transition.size());
  std::vector<double> row(M);

  for (int i = 0; i < M; ++i) {
    for (int a = 0; a < A; ++a) {
      double sum = 0.0;
      for (int j = 0; j < M; ++j) {
        row[j] = rng.next_double();
        sum += row[j];
      }
      // A row of all-zero draws has probability 2^-53M; renormalize defensively.
      if (sum <= 0.0) {
        for (int j = 0; j < M; ++j) row[j] = 1.0;
        sum = static_cast<double>(M);
      }
      const std::size_t off = (static_cast<std::size_t>(i) * A + a) * M;
      for (int j = 0; j < M; ++j) {
        double q = row[j] / sum;
        double pj = (1.0 - cfg.min_self_loop) * q;
        if (j == i) pj += cfg.min_self_loop;
        transition[off + j] = pj;
      }
      for (int j = 0; j < M; ++j) {
        reward[off + j] = cfg.reward_low + rng.next_double() * (cfg.reward_high - cfg.reward_low);
      }
    }
  }
  return make_mdp(M, A, std::move(transition), std::move(reward), cfg.discount);
}

double expected_reward(const Mdp& mdp, int i, int a) {
  if (i < 0 || i >= mdp.num_states || a < 0 || a >= mdp.num_actions) {
    throw std::out_of_range("expected_reward: index out of range");
  }
  const std::size_t off = mdp.row_offset(i, a);
  double sum = 0.0;
  for (int j = 0; j < mdp.num_states; ++j) {
    sum += mdp.transition[off + j] * mdp.reward[off + j];
  }
  return sum;
}

std::pair<int, double> sample_transition(const Mdp& mdp, int i, int a, SplitMix64& rng) {
  const std::size_t off = mdp.row_offset(i, a);
  const double u = rng.next_double();
  double cum = 0.0;
  int last_positive = 0;
  for (int j = 0; j < mdp.num_states; ++j) {
    const double pj = mdp.transition[off + j];
    if (pj > 0.0) last_positive = j;
    cum += pj;
    if (u < cum) return {j, mdp.reward[off + j]};
  }
  // u landed past the accumulated sum (rounding); take the last reachable state.
  return {last_positive, mdp.reward[off + last_positive]};
}

ValidationError::ValidationError(ValidationReport rep)
    : std::runtime_error([&rep] {
        std::string msg = "MDP validation failed:";
        for (const auto& issue : rep.issues) msg += "\n  " + issue.message;
        return msg;
      }()),
      report_(std::move(rep)) {}

void write_mdp(const Mdp& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "mdp " << mdp.num_states << ' ' << mdp.num_actions << ' ' << format17(mdp.discount)
      << '\n';
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      out << "P " << i << ' ' << a;
      for (int j = 0; j < mdp.num_states; ++j) out << ' ' << format17(mdp.p(i, a, j));
      out << '\n';
      out << "R " << i << ' ' << a;
      for (int j = 0; j < mdp.num_states; ++j) out << ' ' << format17(mdp.r(i, a, j));
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Mdp read_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  int lineno = 0;
  auto next_content_line = [&](std::string& out_line) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      out_line = line;
      return true;
    }
    return false;
  };

  std::string content;
  if (!next_content_line(content)) throw ParseError(lineno, "missing header line");
  std::istringstream header(content);
  std::string tag;
  int M = 0, A = 0;
  double discount = 0.0;
  if (!(header >> tag >> M >> A >> discount) || tag != "mdp") {
    throw ParseError(lineno, "expected 'mdp <num_states> <num_actions> <discount>'");
  }
  if (M <= 0 || A <= 0) throw ParseError(lineno, "num_states and num_actions must be positive");

  std::vector<double> transition(static_cast<std::size_t>(M) * A * M);
  std::vector<double> reward(transition.size());

  for (int i = 0; i < M; ++i) {
    for (int a = 0; a < A; ++a) {
      for (char kind : {'P', 'R'}) {
        if (!next_content_line(content)) {
          throw ParseError(lineno, std::string("missing ") + kind + " row for (" +
                                       std::to_string(i) + "," + std::to_string(a) + ")");
        }
        std::istringstream row(content);
        std::string rtag;
        int ri = -1, ra = -1;
        if (!(row >> rtag >> ri >> ra) || rtag != std::string(1, kind) || ri != i || ra != a) {
          throw ParseError(lineno, std::string("expected '") + kind + " " + std::to_string(i) +
                                       " " + std::to_string(a) + " ...'");
        }
        const std::size_t off = (static_cast<std::size_t>(i) * A + a) * M;
        auto* dest = (kind == 'P') ? &transition : &reward;
        for (int j = 0; j < M; ++j) {
          if (!(row >> (*dest)[off + j])) {
            throw ParseError(lineno, "row has fewer than " + std::to_string(M) + " entries");
          }
        }
        double extra;
        if (row >> extra) throw ParseError(lineno, "row has more than " + std::to_string(M) + " entries");
      }
    }
  }

  Mdp mdp = make_mdp(M, A, std::move(transition), std::move(reward), discount);
  ValidationReport rep = validate(mdp);
  if (!rep.ok) throw ValidationError(std::move(rep));
  return mdp;
}

}  // namespace sorq
