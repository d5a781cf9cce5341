#pragma once

#include <stdexcept>
#include <vector>

#include "pbnco/gnn.hpp"
#include "pbnco/memory.hpp"
#include "pbnco/problems.hpp"

namespace pbnco {

inline constexpr int kDefaultKnnK = 20;
inline constexpr double kDefaultWRep = 0.1;

/// One improvement action is available per node: MC always flips; MIS
/// nodes offer deactivate when active, activate when activation is
/// feasible, nothing otherwise.
inline std::vector<char> legal_node_mask(const Adjacency& adj,
                                         const Solution& s) {
  const int n = static_cast<int>(s.bits.size());
  std::vector<char> legal(n, 0);
  for (int u = 0; u < n; ++u) {
    if (s.problem == Problem::MaxCut) {
      legal[u] = 1;
    } else if (s.bits[u]) {
      legal[u] = 1;
    } else {
      legal[u] = is_legal_action(adj, s, {ActionKind::Activate, u}) ? 1 : 0;
    }
  }
  return legal;
}

inline Action node_action(const Solution& s, int node) {
  if (s.problem == Problem::MaxCut) return {ActionKind::Flip, node};
  return {s.bits[node] ? ActionKind::Deactivate : ActionKind::Activate, node};
}

template <class Ctx>
struct CniForward {
  typename Ctx::Value logits_row;  // 1 x |V|
  Eigen::MatrixXd legal_mask;     // 1 x |V|
};

/// Policy forward pass given an explicit memory descriptor z; shared by
/// the sampling step and the training replay so both see the identical
/// distribution.
template <class Ctx>
CniForward<Ctx> cni_forward(Ctx& ctx, const PolicyParameters& pp,
                            const GraphInstance& g, const Adjacency& adj,
                            const Solution& s, const Eigen::VectorXd& z) {
  const Eigen::MatrixXd feats = build_cni_features(g, s.bits, z);
  auto h = encode(ctx, pp, g, feats, edge_presence_features(g));
  auto logits = decode_node_logits(ctx, pp, h);  // |V| x 1

  const std::vector<char> legal = legal_node_mask(adj, s);
  CniForward<Ctx> fwd{nn::transpose(logits),
                      Eigen::MatrixXd(1, g.node_count)};
  bool any = false;
  for (int u = 0; u < g.node_count; ++u) {
    fwd.legal_mask(0, u) = legal[u] ? 1.0 : 0.0;
    any = any || legal[u];
  }
  if (!any)
    throw std::runtime_error("cni_forward: no legal action (terminal)");
  return fwd;
}

template <class Ctx>
struct CniStep {
  Solution next;
  Action action{ActionKind::Flip, 0};
  Eigen::VectorXd descriptor;    // z used for conditioning
  typename Ctx::Value log_prob;  // 1x1
};

/// One improvement step: condition on the current solution and the k-NN
/// memory descriptor, encode, pick a node (sample or greedy), apply its
/// action. Does not write to the memory; the caller's step barrier does.
template <class Ctx>
CniStep<Ctx> cni_step(Ctx& ctx, const PolicyParameters& pp,
                      const GraphInstance& g, const Adjacency& adj,
                      const Solution& s, const SharedMemory& mem, int knn_k,
                      Rng& rng, bool greedy) {
  CniStep<Ctx> step;
  step.descriptor = mem.knn_descriptor(s.bits, knn_k);
  auto fwd = cni_forward(ctx, pp, g, adj, s, step.descriptor);
  auto dist = nn::masked_row_softmax(fwd.logits_row, fwd.legal_mask);
  const Eigen::VectorXd probs = nn::value_of(dist).row(0).transpose();
  const int node = greedy ? greedy_action(probs) : sample_action(probs, rng);

  step.action = node_action(s, node);
  step.next = apply_action(adj, s, step.action);
  step.log_prob = nn::log(nn::entry(dist, 0, node));
  return step;
}

struct CniReward {
  double total = 0.0;
  double r_obj = 0.0;
  double r_rep = 0.0;
  double new_best = 0.0;  // raw objective
};

/// Clipped improvement over the trajectory best plus the repetition
/// penalty. Improvement is measured on normalized objectives by default
/// so w_rep carries a problem-independent meaning.
CniReward cni_reward(double prev_best, double new_objective, bool revisited,
                     double w_rep, const RewardScale& scale,
                     bool normalized = true);

}  // namespace pbnco
