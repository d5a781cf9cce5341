#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pbnco/cnc.hpp"
#include "pbnco/cni.hpp"
#include "test_util.hpp"

using namespace pbnco;
using Eigen::MatrixXd;

namespace {

GnnConfig cni_config() {
  GnnConfig c;
  c.layers = 2;
  c.dim = 16;
  c.heads = 4;
  c.ff_dim = 32;
  c.node_in = 2;
  return c;
}

GnnConfig cnc_config(Problem p, int k_max) {
  GnnConfig c;
  c.layers = 2;
  c.dim = 16;
  c.heads = 4;
  c.ff_dim = 32;
  c.node_in = k_max + 1 + (p == Problem::MaxCut ? 1 : 0);
  c.has_anchor = p == Problem::MaxCut;
  return c;
}

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

TEST_CASE("legal node mask: every max-cut node can flip") {
  const GraphInstance g = testutil::k3();
  const Adjacency adj(g);
  const Solution s = make_solution(g, Problem::MaxCut, {1, 0, 0});
  CHECK(legal_node_mask(adj, s) == std::vector<char>{1, 1, 1});
}

TEST_CASE("legal node mask: mis blocks neighbors of active nodes") {
  const GraphInstance g = testutil::path3();
  const Adjacency adj(g);
  const Solution s = make_solution(g, Problem::Mis, {1, 0, 0});
  CHECK(legal_node_mask(adj, s) == std::vector<char>{1, 0, 1});
  const Solution t = make_solution(g, Problem::Mis, {0, 1, 0});
  CHECK(legal_node_mask(adj, t) == std::vector<char>{0, 1, 0});
}

TEST_CASE("node_action maps nodes to the problem's move") {
  Solution s;
  s.problem = Problem::MaxCut;
  s.bits = {0, 1};
  CHECK(node_action(s, 1) == Action{ActionKind::Flip, 1});
  s.problem = Problem::Mis;
  CHECK(node_action(s, 0) == Action{ActionKind::Activate, 0});
  CHECK(node_action(s, 1) == Action{ActionKind::Deactivate, 1});
}

TEST_CASE("cni_step: sampled action, next state, and log-prob are consistent") {
  const GraphInstance g = generate_er(10, 0.35, 4);
  const Adjacency adj(g);
  const PolicyParameters pp = make_policy(cni_config(), 17);
  SharedMemory mem;
  Rng init(3);
  mem.insert(random_solution(g, adj, Problem::MaxCut, init));
  mem.insert(random_solution(g, adj, Problem::MaxCut, init));

  for (Problem problem : {Problem::MaxCut, Problem::Mis}) {
    Rng walk(11);
    Solution s = random_solution(g, adj, problem, walk);
    for (int step_idx = 0; step_idx < 10; ++step_idx) {
      Rng twin = walk;  // replicate the sampling stream
      EvalContext ctx;
      const auto step =
          cni_step(ctx, pp, g, adj, s, mem, kDefaultKnnK, walk, false);

      CHECK(step.descriptor == mem.knn_descriptor(s.bits, kDefaultKnnK));
      const auto fwd = cni_forward(ctx, pp, g, adj, s, step.descriptor);
      const MatrixXd dist =
          nn::masked_row_softmax(fwd.logits_row, fwd.legal_mask);
      const Eigen::VectorXd probs = dist.row(0).transpose();
      const int expected_node = sample_action(probs, twin);

      CHECK(step.action == node_action(s, expected_node));
      CHECK(step.next == apply_action(adj, s, step.action));
      CHECK(step.log_prob(0, 0) ==
            doctest::Approx(std::log(probs(expected_node))).epsilon(1e-12));
      CHECK(fwd.legal_mask(0, expected_node) == 1.0);
      s = step.next;
    }
  }
}

TEST_CASE("cni_step greedy picks the highest-probability legal node") {
  const GraphInstance g = generate_er(12, 0.3, 9);
  const Adjacency adj(g);
  const PolicyParameters pp = make_policy(cni_config(), 23);
  SharedMemory mem;
  Rng rng(2);
  const Solution s = random_solution(g, adj, Problem::Mis, rng);

  EvalContext ctx;
  const auto step = cni_step(ctx, pp, g, adj, s, mem, kDefaultKnnK, rng, true);
  const auto fwd = cni_forward(ctx, pp, g, adj, s, Eigen::VectorXd::Zero(12));
  const MatrixXd dist = nn::masked_row_softmax(fwd.logits_row, fwd.legal_mask);
  CHECK(step.action.node == greedy_action(dist.row(0).transpose()));
  CHECK(step.log_prob(0, 0) ==
        doctest::Approx(std::log(dist(0, step.action.node))).epsilon(1e-12));
}

TEST_CASE("cni_reward clips improvement and penalizes revisits") {
  const RewardScale rs = mc_reward_scale(testutil::k3());
  const double w_rep = 0.1;

  // Improvement: raw best 1 -> 2, normalized gain (2-1)/scale.
  const CniReward up = cni_reward(1.0, 2.0, false, w_rep, rs);
  CHECK(up.r_obj == doctest::Approx((rs.normalize(2.0) - rs.normalize(1.0))));
  CHECK(up.r_rep == 0.0);
  CHECK(up.total == doctest::Approx(up.r_obj));
  CHECK(up.new_best == 2.0);

  // No improvement: clipped at zero, best unchanged.
  const CniReward down = cni_reward(2.0, 0.0, false, w_rep, rs);
  CHECK(down.r_obj == 0.0);
  CHECK(down.total == 0.0);
  CHECK(down.new_best == 2.0);

  // Revisit penalty applies on top of the clipped objective term.
  const CniReward rev = cni_reward(2.0, 0.0, true, w_rep, rs);
  CHECK(rev.r_rep == -1.0);
  CHECK(rev.total == doctest::Approx(-w_rep));
  const CniReward rev_up = cni_reward(1.0, 2.0, true, w_rep, rs);
  CHECK(rev_up.total == doctest::Approx(rev_up.r_obj - w_rep));

  // Raw mode skips the normalization.
  const CniReward raw = cni_reward(1.0, 2.0, false, w_rep, rs, false);
  CHECK(raw.r_obj == doctest::Approx(1.0));
}

TEST_CASE("objective rewards telescope to best-minus-initial") {
  Rng rng(31);
  const GraphInstance g = generate_er(14, 0.3, 6);
  const RewardScale rs = mc_reward_scale(g);
  for (int traj = 0; traj < 100; ++traj) {
    double best = rng.uniform(0.0, 10.0);
    const double initial_best = best;
    double sum_r_obj = 0.0;
    for (int t = 0; t < 50; ++t) {
      const double f = rng.uniform(0.0, 12.0);
      const CniReward r = cni_reward(best, f, rng.bernoulli(0.3), 0.1, rs);
      sum_r_obj += r.r_obj;
      best = r.new_best;
    }
    CHECK(sum_r_obj == doctest::Approx(rs.normalize(best) -
                                       rs.normalize(initial_best))
                           .epsilon(1e-9));
  }
}

TEST_CASE("cnc max-cut: anchor fixed, likelihood and entropy match recompute") {
  const GraphInstance g = generate_er(12, 0.3, 8);
  const Adjacency adj(g);
  const int k_max = 4;
  const PolicyParameters pp = make_policy(cnc_config(Problem::MaxCut, k_max), 3);
  Rng ref_rng(14);
  const std::vector<Bits> refs = {
      random_solution(g, adj, Problem::MaxCut, ref_rng).bits};

  for (bool greedy : {false, true}) {
    Rng rng(77);
    EvalContext ctx;
    const auto built = cnc_construct(ctx, pp, g, adj, Problem::MaxCut, refs,
                                     0.4, k_max, rng, greedy);
    CHECK(built.solution.bits[0] == 1);
    CHECK(built.solution.objective ==
          mc_objective(g, built.solution.bits));

    // Recompute the logits and the per-node Bernoulli terms directly.
    const MatrixXd feats = build_cnc_features(g, refs, 0.4, k_max, true);
    const MatrixXd logits = decode_node_logits(
        ctx, pp, encode(ctx, pp, g, feats, edge_presence_features(g)));
    double logp = 0.0, entropy = 0.0;
    for (int u = 1; u < g.node_count; ++u) {
      const double l = logits(u, 0);
      logp += built.solution.bits[u] ? log_sigmoid(l) : log_sigmoid(-l);
      const double p = 1.0 / (1.0 + std::exp(-l));
      entropy -= p * log_sigmoid(l) + (1.0 - p) * log_sigmoid(-l);
      if (greedy) CHECK(built.solution.bits[u] == (l >= 0.0 ? 1 : 0));
    }
    CHECK(built.log_prob(0, 0) == doctest::Approx(logp).epsilon(1e-12));
    CHECK(built.entropy(0, 0) == doctest::Approx(entropy).epsilon(1e-12));
  }
}

TEST_CASE("cnc max-cut: greedy log-likelihood dominates sampled constructions") {
  const GraphInstance g = generate_er(10, 0.3, 15);
  const Adjacency adj(g);
  const PolicyParameters pp = make_policy(cnc_config(Problem::MaxCut, 3), 9);
  EvalContext ctx;
  Rng rng(1);
  const auto greedy =
      cnc_construct(ctx, pp, g, adj, Problem::MaxCut, {}, 0.2, 3, rng, true);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sampled =
        cnc_construct(ctx, pp, g, adj, Problem::MaxCut, {}, 0.2, 3, rng, false);
    CHECK(sampled.log_prob(0, 0) <= greedy.log_prob(0, 0) + 1e-12);
  }
}

TEST_CASE("cnc mis: always feasible and maximal, likelihood over activations") {
  const GraphInstance g = generate_er(14, 0.25, 21);
  const Adjacency adj(g);
  const int k_max = 3;
  const PolicyParameters pp = make_policy(cnc_config(Problem::Mis, k_max), 4);
  EvalContext ctx;
  Rng rng(6);

  for (int trial = 0; trial < 30; ++trial) {
    const bool greedy = trial == 0;
    const auto built = cnc_construct(ctx, pp, g, adj, Problem::Mis, {},
                                     0.7, k_max, rng, greedy);
    CHECK(mis_is_feasible(g, built.solution.bits));
    const Solution& s = built.solution;
    for (const Action& a : legal_actions(adj, s))
      CHECK(a.kind != ActionKind::Activate);

    const MatrixXd feats = build_cnc_features(g, {}, 0.7, k_max, false);
    const MatrixXd logits = decode_node_logits(
        ctx, pp, encode(ctx, pp, g, feats, edge_presence_features(g)));
    double logp = 0.0;
    for (int u = 0; u < g.node_count; ++u)
      if (s.bits[u]) logp += log_sigmoid(logits(u, 0));
    CHECK(built.log_prob(0, 0) == doctest::Approx(logp).epsilon(1e-12));
  }
}

TEST_CASE("cnc mis greedy scans nodes in descending logit order") {
  const GraphInstance g = generate_er(16, 0.3, 33);
  const Adjacency adj(g);
  const int k_max = 2;
  const PolicyParameters pp = make_policy(cnc_config(Problem::Mis, k_max), 12);
  EvalContext ctx;
  Rng rng(0);
  const auto built =
      cnc_construct(ctx, pp, g, adj, Problem::Mis, {}, 0.0, k_max, rng, true);

  const MatrixXd feats = build_cnc_features(g, {}, 0.0, k_max, false);
  const MatrixXd logits = decode_node_logits(
      ctx, pp, encode(ctx, pp, g, feats, edge_presence_features(g)));
  std::vector<int> order(g.node_count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (logits(a, 0) != logits(b, 0)) return logits(a, 0) > logits(b, 0);
    return a < b;
  });
  Bits expected(g.node_count, 0);
  for (int u : order) {
    bool blocked = false;
    for (int v : adj.neighbors[u]) blocked = blocked || expected[v];
    if (!blocked) expected[u] = 1;
  }
  CHECK(built.solution.bits == expected);
}

TEST_CASE("cnc gradients flow through the construction likelihood") {
  const GraphInstance g = generate_er(8, 0.35, 2);
  const Adjacency adj(g);
  const PolicyParameters pp = make_policy(cnc_config(Problem::MaxCut, 2), 5);
  ad::Tape tape;
  GradContext ctx(tape);
  Rng rng(4);
  const auto built =
      cnc_construct(ctx, pp, g, adj, Problem::MaxCut, {}, 0.1, 2, rng, false);
  tape.backward(built.log_prob);
  CHECK(ctx.grad(pp.dec2).cwiseAbs().maxCoeff() > 0.0);
  CHECK(ctx.grad(pp.node_proj).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("cnc_reward blends objective and diversity affinely in omega") {
  const GraphInstance g = testutil::k3();
  const RewardScale rs = mc_reward_scale(g);
  Solution s = make_solution(g, Problem::MaxCut, {1, 0, 0});
  const std::vector<Bits> refs = {{1, 0, 0}, {0, 1, 1}};

  // Mean normalized Hamming to K: (0 + 1) / 2.
  const double div = 0.5;
  const double obj = rs.normalize(s.objective);
  CHECK(cnc_reward(s, refs, 0.0, rs) == doctest::Approx(obj).epsilon(1e-12));
  CHECK(cnc_reward(s, refs, 1.0, rs) == doctest::Approx(div).epsilon(1e-12));
  const double mid = cnc_reward(s, refs, 0.3, rs);
  CHECK(mid == doctest::Approx(0.7 * obj + 0.3 * div).epsilon(1e-12));
  CHECK(mid == doctest::Approx(0.7 * cnc_reward(s, refs, 0.0, rs) +
                               0.3 * cnc_reward(s, refs, 1.0, rs))
                   .epsilon(1e-12));

  // Empty conditioning set: the diversity term is defined as zero.
  CHECK(cnc_reward(s, {}, 0.8, rs) == doctest::Approx(0.2 * obj).epsilon(1e-12));
}

TEST_CASE("omega samples follow the configured beta distribution") {
  Rng rng(55);
  const int big = 1000000;
  double sum = 0.0;
  int tails = 0;
  for (int i = 0; i < big; ++i) {
    const double w = sample_omega(rng);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    sum += w;
    if (w < 0.1 || w > 0.9) ++tails;
  }
  CHECK(sum / big == doctest::Approx(0.5).epsilon(0.004));

  // Tail mass against two independent oracles: the regularized
  // incomplete beta function, and midpoint quadrature away from the
  // integrable endpoint singularities.
  const double below = testutil::incbeta(0.2, 0.2, 0.1);
  const double above = 1.0 - testutil::incbeta(0.2, 0.2, 0.9);
  const double middle_quad = testutil::beta_mass(0.2, 0.2, 0.1, 0.9);
  CHECK(1.0 - (below + above) == doctest::Approx(middle_quad).epsilon(1e-3));
  CHECK(static_cast<double>(tails) / big ==
        doctest::Approx(below + above).epsilon(0.015));
}

TEST_CASE("omega with unit shape parameters is uniform") {
  Rng rng(56);
  const int big = 100000;
  std::vector<double> xs(big);
  for (auto& x : xs) x = sample_omega(rng, 1.0, 1.0);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (int i = 0; i < big; ++i) {
    ks = std::max(ks, std::abs(xs[i] - (i + 1.0) / big));
    ks = std::max(ks, std::abs(xs[i] - static_cast<double>(i) / big));
  }
  CHECK(ks <= 0.01);
}

TEST_CASE("omega_schedule decays from omega_start to zero") {
  CHECK(omega_schedule(0.0, 100.0, 0.8, 2.0) == doctest::Approx(0.8));
  CHECK(omega_schedule(100.0, 100.0, 0.8, 2.0) == doctest::Approx(0.0));
  CHECK(omega_schedule(50.0, 100.0, 0.8, 2.0) ==
        doctest::Approx(0.8 * 0.25).epsilon(1e-12));
  CHECK(omega_schedule(50.0, 100.0, 0.8, 1.0) ==
        doctest::Approx(0.4).epsilon(1e-12));
  // Clamped on both sides.
  CHECK(omega_schedule(150.0, 100.0, 0.8, 2.0) == 0.0);
  CHECK(omega_schedule(0.0, 100.0, 1.7, 2.0) == 1.0);
}
