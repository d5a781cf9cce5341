#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "pbnco/gnn.hpp"
#include "pbnco/problems.hpp"

namespace pbnco {

inline constexpr int kDefaultKMax = 20;
inline constexpr double kDefaultOmegaAlpha = 0.2;
inline constexpr double kDefaultOmegaBeta = 0.2;

template <class Ctx>
struct CncConstruction {
  Solution solution;
  typename Ctx::Value log_prob;  // 1x1, sum over free decisions
  typename Ctx::Value entropy;   // 1x1, sum of per-decision Bernoulli entropies
};

/// Builds a complete solution conditioned on reference set K and
/// exploration weight omega.
///
/// MC: one encoder pass, per-node Bernoulli(sigmoid(logit)); node 0 is
/// the symmetry anchor, fixed to 1 and excluded from the likelihood.
/// Greedy thresholds at 0.5.
///
/// MIS: nodes are sorted by descending score (greedy: raw logits;
/// sample: logits perturbed with Gumbel noise) with lower-index
/// tie-break, then scanned, activating every node with no active
/// neighbor. The result is feasible and maximal; the training
/// log-probability sums log sigmoid(logit) over the free (unblocked)
/// decisions.
template <class Ctx>
CncConstruction<Ctx> cnc_construct(Ctx& ctx, const PolicyParameters& pp,
                                   const GraphInstance& g, const Adjacency& adj,
                                   Problem problem, const std::vector<Bits>& refs,
                                   double omega, int k_max, Rng& rng,
                                   bool greedy) {
  const bool mc = problem == Problem::MaxCut;
  const Eigen::MatrixXd feats =
      build_cnc_features(g, refs, omega, k_max, /*mc_anchor=*/mc);
  auto h = encode(ctx, pp, g, feats, edge_presence_features(g));
  auto logits = decode_node_logits(ctx, pp, h);  // |V| x 1
  const Eigen::MatrixXd& lv = nn::value_of(logits);
  const int n = g.node_count;

  Bits bits(n, 0);
  Eigen::MatrixXd pos_w = Eigen::MatrixXd::Zero(n, 1);  // weight on log p(1)
  Eigen::MatrixXd neg_w = Eigen::MatrixXd::Zero(n, 1);  // weight on log p(0)

  if (mc) {
    bits[0] = 1;  // anchor breaks the complement symmetry
    for (int u = 1; u < n; ++u) {
      const double l = lv(u, 0);
      bool b;
      if (greedy) {
        b = l >= 0.0;  // sigmoid(l) >= 0.5
      } else {
        const double p = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l))
                                  : std::exp(l) / (1.0 + std::exp(l));
        b = rng.bernoulli(p);
      }
      bits[u] = b ? 1 : 0;
      (b ? pos_w : neg_w)(u, 0) = 1.0;
    }
  } else {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key(n);
    for (int u = 0; u < n; ++u)
      key[u] = greedy ? lv(u, 0) : lv(u, 0) + rng.gumbel();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (key[a] != key[b]) return key[a] > key[b];
      return a < b;
    });
    for (int u : order) {
      bool blocked = false;
      for (int v : adj.neighbors[u])
        if (bits[v]) {
          blocked = true;
          break;
        }
      if (!blocked) {
        bits[u] = 1;
        pos_w(u, 0) = 1.0;  // free decision, realized as activation
      }
    }
  }

  CncConstruction<Ctx> out;
  out.solution = make_solution(g, problem, std::move(bits));
  auto lsp = nn::log_sigmoid(logits);
  auto lsn = nn::log_sigmoid(nn::scale(logits, -1.0));
  out.log_prob = nn::sum(nn::add(nn::cmul(lsp, ctx.leaf(pos_w)),
                                 nn::cmul(lsn, ctx.leaf(neg_w))));

  // H(u) = -[p log p + (1-p) log(1-p)] at p = sigmoid(logit_u), summed
  // over the nodes that carried a decision (pos_w + neg_w is 0/1).
  auto p = nn::sigmoid(logits);
  auto q = nn::sub(ctx.leaf(Eigen::MatrixXd::Ones(n, 1)), p);
  auto plogp = nn::add(nn::cmul(p, lsp), nn::cmul(q, lsn));
  out.entropy =
      nn::scale(nn::sum(nn::cmul(plogp, ctx.leaf(pos_w + neg_w))), -1.0);
  return out;
}

/// Bi-objective construction reward: (1-omega) times the normalized
/// objective plus omega times the mean normalized Hamming distance to
/// the conditioning set (0 when K is empty).
double cnc_reward(const Solution& s, const std::vector<Bits>& refs,
                  double omega, const RewardScale& scale);

/// Exploration weight draw, Beta(alpha, beta).
double sample_omega(Rng& rng, double alpha = kDefaultOmegaAlpha,
                    double beta = kDefaultOmegaBeta);

/// Budget-aware restart schedule omega_start * (1 - t/T_max)^phi,
/// clamped to [0, 1] (t past T_max in wall-clock mode maps to 0).
double omega_schedule(double t, double t_max, double omega_start, double phi);

}  // namespace pbnco
