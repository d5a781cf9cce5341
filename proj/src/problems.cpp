#include "pbnco/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pbnco {

const char* problem_name(Problem p) {
  return p == Problem::MaxCut ? "mc" : "mis";
}

Problem parse_problem(const std::string& name) {
  if (name == "mc" || name == "maxcut") return Problem::MaxCut;
  if (name == "mis") return Problem::Mis;
  throw std::invalid_argument("unknown problem: " + name);
}

double mc_objective(const GraphInstance& g, const Bits& bits) {
  if (static_cast<int>(bits.size()) != g.node_count)
    throw std::invalid_argument("solution length does not match node count");
  double cut = 0.0;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (bits[g.edges[e].first] != bits[g.edges[e].second]) cut += g.weight(e);
  return cut;
}

double mis_objective(const Bits& bits) {
  return static_cast<double>(
      std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

bool mis_is_feasible(const GraphInstance& g, const Bits& bits) {
  if (static_cast<int>(bits.size()) != g.node_count) return false;
  for (const auto& [u, v] : g.edges)
    if (bits[u] && bits[v]) return false;
  return true;
}

double objective_value(const GraphInstance& g, Problem problem,
                       const Bits& bits) {
  return problem == Problem::MaxCut ? mc_objective(g, bits)
                                    : mis_objective(bits);
}

Solution make_solution(const GraphInstance& g, Problem problem, Bits bits) {
  if (static_cast<int>(bits.size()) != g.node_count)
    throw std::invalid_argument("solution length does not match node count");
  if (problem == Problem::Mis && !mis_is_feasible(g, bits))
    throw std::invalid_argument("infeasible independent set");
  Solution s;
  s.problem = problem;
  s.objective = objective_value(g, problem, bits);
  s.bits = std::move(bits);
  return s;
}

RewardScale mc_reward_scale(const GraphInstance& g, bool natural_log) {
  RewardScale rs;
  rs.problem = Problem::MaxCut;
  const double m = static_cast<double>(g.edge_count());
  rs.baseline = m / 2.0;
  const double log_two = natural_log ? std::numbers::ln2 : 1.0;
  rs.scale = m > 0.0 ? std::sqrt(m * g.node_count * log_two / 2.0) : 1.0;
  return rs;
}

int greedy_matching_size(const GraphInstance& g) {
  std::vector<char> matched(g.node_count, 0);
  int size = 0;
  for (const auto& [u, v] : g.edges) {
    if (!matched[u] && !matched[v]) {
      matched[u] = matched[v] = 1;
      ++size;
    }
  }
  return size;
}

RewardScale mis_reward_scale(const GraphInstance& g) {
  RewardScale rs;
  rs.problem = Problem::Mis;
  Adjacency adj(g);
  double lower = 0.0;
  for (int u = 0; u < g.node_count; ++u)
    lower += 1.0 / (adj.degree(u) + 1.0);
  rs.lower_L = lower;
  rs.upper_U = g.node_count - greedy_matching_size(g);
  return rs;
}

RewardScale reward_scale(const GraphInstance& g, Problem problem,
                         bool natural_log) {
  return problem == Problem::MaxCut ? mc_reward_scale(g, natural_log)
                                    : mis_reward_scale(g);
}

double hamming_normalized(const Bits& a, const Bits& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming: length mismatch");
  if (a.empty()) return 0.0;
  int diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

Solution random_solution(const GraphInstance& g, const Adjacency& adj,
                         Problem problem, Rng& rng) {
  Bits bits(g.node_count, 0);
  if (problem == Problem::MaxCut) {
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
  } else {
    std::vector<int> candidates(g.node_count);
    std::iota(candidates.begin(), candidates.end(), 0);
    std::vector<char> removed(g.node_count, 0);
    while (!candidates.empty()) {
      const auto pick = rng.uniform_int(candidates.size());
      const int u = candidates[pick];
      bits[u] = 1;
      removed[u] = 1;
      for (int v : adj.neighbors[u]) removed[v] = 1;
      std::erase_if(candidates, [&](int v) { return removed[v]; });
    }
  }
  return make_solution(g, problem, std::move(bits));
}

bool is_legal_action(const Adjacency& adj, const Solution& s, Action a) {
  if (a.node < 0 || a.node >= static_cast<int>(s.bits.size())) return false;
  if (s.problem == Problem::MaxCut) return a.kind == ActionKind::Flip;
  if (a.kind == ActionKind::Deactivate) return s.bits[a.node] == 1;
  if (a.kind == ActionKind::Activate) {
    if (s.bits[a.node] != 0) return false;
    for (int v : adj.neighbors[a.node])
      if (s.bits[v]) return false;
    return true;
  }
  return false;
}

std::vector<Action> legal_actions(const Adjacency& adj, const Solution& s) {
  std::vector<Action> actions;
  const int n = static_cast<int>(s.bits.size());
  if (s.problem == Problem::MaxCut) {
    actions.reserve(n);
    for (int u = 0; u < n; ++u) actions.push_back({ActionKind::Flip, u});
    return actions;
  }
  for (int u = 0; u < n; ++u) {
    if (s.bits[u]) {
      actions.push_back({ActionKind::Deactivate, u});
    } else if (is_legal_action(adj, s, {ActionKind::Activate, u})) {
      actions.push_back({ActionKind::Activate, u});
    }
  }
  return actions;
}

Solution apply_action(const Adjacency& adj, const Solution& s, Action a) {
  if (!is_legal_action(adj, s, a))
    throw std::logic_error("apply_action: illegal action");
  Solution next = s;
  const int u = a.node;
  if (s.problem == Problem::MaxCut) {
    double delta = 0.0;
    const auto& nbrs = adj.neighbors[u];
    const auto& ws = adj.neighbor_weights[u];
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const bool crossing = s.bits[u] != s.bits[nbrs[i]];
      delta += crossing ? -ws[i] : ws[i];
    }
    next.bits[u] ^= 1;
    next.objective += delta;
  } else if (a.kind == ActionKind::Activate) {
    next.bits[u] = 1;
    next.objective += 1.0;
  } else {
    next.bits[u] = 0;
    next.objective -= 1.0;
  }
  return next;
}

Eigen::MatrixXd build_cni_features(const GraphInstance& g, const Bits& bits,
                                   const Eigen::VectorXd& z) {
  if (static_cast<int>(bits.size()) != g.node_count ||
      z.size() != g.node_count)
    throw std::invalid_argument("cni features: length mismatch");
  Eigen::MatrixXd x(g.node_count, 2);
  for (int u = 0; u < g.node_count; ++u) {
    x(u, 0) = static_cast<double>(bits[u]);
    x(u, 1) = z(u);
  }
  return x;
}

Eigen::MatrixXd build_cnc_features(const GraphInstance& g,
                                   const std::vector<Bits>& refs, double omega,
                                   int k_max, bool mc_anchor) {
  if (static_cast<int>(refs.size()) > k_max)
    throw std::invalid_argument("cnc features: |K| exceeds K_max");
  const int cols = k_max + 1 + (mc_anchor ? 1 : 0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(g.node_count, cols);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (static_cast<int>(refs[k].size()) != g.node_count)
      throw std::invalid_argument("cnc features: reference length mismatch");
    for (int u = 0; u < g.node_count; ++u)
      x(u, static_cast<int>(k)) = static_cast<double>(refs[k][u]);
  }
  x.col(k_max).setConstant(omega);
  if (mc_anchor) x(0, k_max + 1) = 1.0;
  return x;
}

Eigen::MatrixXd edge_presence_features(const GraphInstance& g) {
  return Eigen::MatrixXd::Ones(g.edge_count(), 1);
}

}  // namespace pbnco
