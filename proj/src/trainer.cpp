#include "pbnco/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "pbnco/trace.hpp"

namespace pbnco {

std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("compute_returns: gamma outside [0,1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

std::vector<std::vector<double>> batch_advantages(const TrajectoryBatch& batch,
                                                  BaselineMode mode) {
  const std::size_t m = batch.rewards.size();
  if (m == 0 || batch.log_probs.size() != m)
    throw std::invalid_argument("batch_advantages: empty or mismatched batch");

  std::vector<std::vector<double>> returns(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (batch.log_probs[i].size() != batch.rewards[i].size() ||
        batch.rewards[i].empty())
      throw std::invalid_argument("batch_advantages: ragged trajectory");
    returns[i] = compute_returns(batch.rewards[i], batch.gamma);
  }

  if (mode == BaselineMode::TimestepMean) {
    const std::size_t steps = returns[0].size();
    for (const auto& r : returns)
      if (r.size() != steps)
        throw std::invalid_argument(
            "batch_advantages: TimestepMean needs equal-length trajectories");
    for (std::size_t t = 0; t < steps; ++t) {
      double b = 0.0;
      for (const auto& r : returns) b += r[t];
      b /= static_cast<double>(m);
      for (auto& r : returns) r[t] -= b;
    }
  } else {
    double b = 0.0;
    for (const auto& r : returns) b += r[0];
    b /= static_cast<double>(m);
    for (auto& r : returns)
      for (auto& v : r) v -= b;
  }
  return returns;
}

ad::Var pg_loss(const TrajectoryBatch& batch, BaselineMode mode) {
  const auto adv = batch_advantages(batch, mode);
  ad::Var loss;
  bool first = true;
  for (std::size_t i = 0; i < batch.log_probs.size(); ++i) {
    for (std::size_t t = 0; t < batch.log_probs[i].size(); ++t) {
      auto term = nn::scale(batch.log_probs[i][t], -adv[i][t]);
      loss = first ? term : nn::add(loss, term);
      first = false;
    }
  }
  return loss;
}

namespace {

std::vector<Eigen::MatrixXd*> parameter_list(PolicyParameters& pp) {
  std::vector<Eigen::MatrixXd*> out;
  pp.visit([&](Eigen::MatrixXd& m) { out.push_back(&m); });
  return out;
}

std::vector<Eigen::MatrixXd> zero_like(const std::vector<Eigen::MatrixXd*>& ps) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(ps.size());
  for (const auto* p : ps)
    out.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  return out;
}

void accumulate_grads(const GradContext& ctx,
                      const std::vector<Eigen::MatrixXd*>& ps,
                      std::vector<Eigen::MatrixXd>& grads) {
  for (std::size_t i = 0; i < ps.size(); ++i) grads[i] += ctx.grad(*ps[i]);
}

struct MetricsSink {
  std::ofstream file;

  explicit MetricsSink(const std::string& path) {
    if (path.empty()) return;
    file.open(path, std::ios::trunc);
    if (!file)
      throw std::runtime_error("trainer: cannot open metrics path " + path);
  }

  void write(const EpisodeMetrics& m) {
    if (!file.is_open()) return;
    file << "{\"episode\":" << m.episode
         << ",\"mean_reward\":" << format_double(m.mean_reward)
         << ",\"loss\":" << format_double(m.loss);
    if (m.validation)
      file << ",\"validation\":" << format_double(*m.validation);
    file << "}\n";
    file.flush();
  }
};

struct ValInstance {
  GraphInstance g;
  Adjacency adj;
  RewardScale scale;
  Solution start;  // cNI greedy rollouts begin here
};

std::vector<ValInstance> make_validation_set(const TrainConfig& cfg, Rng& rng) {
  std::vector<ValInstance> out;
  for (int i = 0; i < cfg.validation_instances; ++i) {
    GraphInstance g = generate_er(cfg.n_max, cfg.er_p, rng.next_u64());
    Adjacency adj(g);
    RewardScale scale = reward_scale(g, cfg.problem, cfg.natural_log_scale);
    Solution start = random_solution(g, adj, cfg.problem, rng);
    out.push_back({std::move(g), std::move(adj), scale, std::move(start)});
  }
  return out;
}

[[noreturn]] void diverged(const char* which, int episode, double loss,
                           double mean_reward) {
  std::ostringstream msg;
  msg << which << ": non-finite loss at episode " << episode
      << " (loss=" << loss << ", mean_reward=" << mean_reward
      << "); lower lr or check reward scaling";
  throw std::runtime_error(msg.str());
}

/// Greedy improvement rollout with a private, initially empty memory;
/// returns the best normalized objective seen.
double greedy_cni_rollout(const PolicyParameters& pp, const ValInstance& vi,
                          int knn_k, int steps) {
  EvalContext ctx;
  SharedMemory mem;
  Rng scratch(0);  // greedy steps draw nothing
  Solution cur = vi.start;
  double best = cur.objective;
  for (int t = 0; t < steps; ++t) {
    auto step = cni_step(ctx, pp, vi.g, vi.adj, cur, mem, knn_k, scratch,
                         /*greedy=*/true);
    mem.insert(step.next);
    cur = std::move(step.next);
    best = std::max(best, cur.objective);
  }
  return vi.scale.normalize(best);
}

double validate_cni(const PolicyParameters& pp,
                    const std::vector<ValInstance>& vs, const TrainConfig& cfg) {
  if (vs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& vi : vs) {
    const int steps =
        cfg.t_train > 0 ? cfg.t_train : 2 * vi.g.node_count;
    sum += greedy_cni_rollout(pp, vi, cfg.knn_k, steps);
  }
  return sum / static_cast<double>(vs.size());
}

double validate_cnc(const PolicyParameters& pp,
                    const std::vector<ValInstance>& vs, const TrainConfig& cfg) {
  if (vs.empty()) return 0.0;
  EvalContext ctx;
  Rng scratch(0);  // greedy constructions draw nothing
  double sum = 0.0;
  for (const auto& vi : vs) {
    auto con = cnc_construct(ctx, pp, vi.g, vi.adj, cfg.problem, {},
                             /*omega=*/0.0, cfg.k_max, scratch,
                             /*greedy=*/true);
    sum += vi.scale.normalize(con.solution.objective);
  }
  return sum / static_cast<double>(vs.size());
}

bool validation_due(const TrainConfig& cfg, int episode) {
  if (cfg.validation_every <= 0 || cfg.validation_instances <= 0) return false;
  return (episode + 1) % cfg.validation_every == 0 ||
         episode + 1 == cfg.episodes;
}

}  // namespace

TrainResult train_cni(const TrainConfig& cfg) {
  if (cfg.episodes <= 0 || cfg.population <= 0 || cfg.n_min < 1 ||
      cfg.n_max < cfg.n_min)
    throw std::invalid_argument("train_cni: bad config");

  GnnConfig gc;
  gc.layers = cfg.layers;
  gc.dim = cfg.dim;
  gc.heads = cfg.heads;
  gc.ff_dim = cfg.ff_dim;
  gc.node_in = 2;
  gc.edge_in = 1;
  gc.has_anchor = false;
  gc.dense_attention = cfg.dense_attention;

  Rng rng(cfg.seed);
  PolicyParameters pp = make_policy(gc, rng.next_u64());
  const auto params = parameter_list(pp);
  ad::AdamState adam;
  const auto val_set = make_validation_set(cfg, rng);
  MetricsSink sink(cfg.metrics_path);

  struct StepRecord {
    Bits state;
    Eigen::VectorXd descriptor;
    int node = 0;
  };

  TrainResult result;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const int n = rng.uniform_int(cfg.n_min, cfg.n_max);
    const GraphInstance g = generate_er(n, cfg.er_p, rng.next_u64());
    const Adjacency adj(g);
    const RewardScale scale =
        reward_scale(g, cfg.problem, cfg.natural_log_scale);
    const int horizon = cfg.t_train > 0 ? cfg.t_train : 2 * n;
    const int pop = cfg.population;

    // Pass 1: sample trajectories, recording just enough to replay each
    // step's forward pass (state bits + memory descriptor + action).
    SharedMemory mem;
    std::vector<Solution> cur;
    std::vector<double> best;
    for (int i = 0; i < pop; ++i) {
      cur.push_back(random_solution(g, adj, cfg.problem, rng));
      best.push_back(cur.back().objective);
    }

    std::vector<std::vector<StepRecord>> records(pop);
    std::vector<std::vector<double>> rewards(pop);
    EvalContext ectx;
    std::vector<Solution> next(cur.size(), cur[0]);
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < pop; ++i) {
        auto step = cni_step(ectx, pp, g, adj, cur[i], mem, cfg.knn_k, rng,
                             /*greedy=*/false);
        const bool revisited = mem.contains(step.next.bits);
        const auto r = cni_reward(best[i], step.next.objective, revisited,
                                  cfg.w_rep, scale, cfg.normalized_reward);
        records[i].push_back(
            {cur[i].bits, std::move(step.descriptor), step.action.node});
        rewards[i].push_back(r.total);
        best[i] = r.new_best;
        next[i] = std::move(step.next);
      }
      for (int i = 0; i < pop; ++i) mem.insert(next[i]);
      cur = next;
    }

    std::vector<std::vector<double>> returns(pop);
    for (int i = 0; i < pop; ++i)
      returns[i] = compute_returns(rewards[i], cfg.gamma);
    for (int t = 0; t < horizon; ++t) {
      double b = 0.0;
      for (int i = 0; i < pop; ++i) b += returns[i][t];
      b /= static_cast<double>(pop);
      for (int i = 0; i < pop; ++i) returns[i][t] -= b;  // now advantages
    }

    // Pass 2: replay one step at a time on a fresh tape so episode memory
    // stays bounded by a single forward pass; gradients accumulate into
    // flat buffers.
    auto grads = zero_like(params);
    double loss_total = 0.0;
    ad::Tape tape;
    for (int i = 0; i < pop; ++i) {
      for (int t = 0; t < horizon; ++t) {
        const auto& rec = records[i][t];
        tape.clear();
        GradContext gctx(tape);
        const Solution s = make_solution(g, cfg.problem, rec.state);
        auto fwd = cni_forward(gctx, pp, g, adj, s, rec.descriptor);
        auto dist = nn::masked_row_softmax(fwd.logits_row, fwd.legal_mask);
        auto term =
            nn::scale(nn::log(nn::entry(dist, 0, rec.node)), -returns[i][t]);
        if (cfg.entropy_coef > 0.0)
          term = nn::sub(term,
                         nn::scale(ad::masked_entropy(fwd.logits_row,
                                                      fwd.legal_mask),
                                   cfg.entropy_coef));
        tape.backward(term);
        accumulate_grads(gctx, params, grads);
        loss_total += term.scalar();
      }
    }

    double reward_sum = 0.0;
    for (const auto& r : rewards)
      for (double v : r) reward_sum += v;
    const double mean_reward =
        reward_sum / static_cast<double>(pop * horizon);
    if (!std::isfinite(loss_total))
      diverged("train_cni", ep, loss_total, mean_reward);

    for (auto& gm : grads) gm = -gm;  // ascend the PG objective
    ad::adam_step(params, grads, adam, cfg.lr);

    EpisodeMetrics m{ep, mean_reward, loss_total, std::nullopt};
    if (validation_due(cfg, ep)) m.validation = validate_cni(pp, val_set, cfg);
    sink.write(m);
    result.metrics.push_back(std::move(m));
  }

  result.checkpoint.meta = {PolicyKind::Improvement, cfg.problem, 0};
  result.checkpoint.params = std::move(pp);
  return result;
}

TrainResult train_cnc(const TrainConfig& cfg) {
  if (cfg.episodes <= 0 || cfg.g_candidates <= 0 || cfg.n_min < 1 ||
      cfg.n_max < cfg.n_min || cfg.k_max < 0)
    throw std::invalid_argument("train_cnc: bad config");

  const bool mc = cfg.problem == Problem::MaxCut;
  GnnConfig gc;
  gc.layers = cfg.layers;
  gc.dim = cfg.dim;
  gc.heads = cfg.heads;
  gc.ff_dim = cfg.ff_dim;
  gc.node_in = cfg.k_max + 1 + (mc ? 1 : 0);
  gc.edge_in = 1;
  gc.has_anchor = mc;
  gc.dense_attention = cfg.dense_attention;

  Rng rng(cfg.seed);
  PolicyParameters pp = make_policy(gc, rng.next_u64());
  const auto params = parameter_list(pp);
  ad::AdamState adam;
  const auto val_set = make_validation_set(cfg, rng);
  MetricsSink sink(cfg.metrics_path);

  TrainResult result;
  ad::Tape tape;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const int n = rng.uniform_int(cfg.n_min, cfg.n_max);
    const GraphInstance g = generate_er(n, cfg.er_p, rng.next_u64());
    const Adjacency adj(g);
    const RewardScale scale =
        reward_scale(g, cfg.problem, cfg.natural_log_scale);

    std::vector<Bits> refs;
    const int k = rng.uniform_int(0, cfg.k_max);
    for (int i = 0; i < k; ++i)
      refs.push_back(random_solution(g, adj, cfg.problem, rng).bits);
    const double omega = sample_omega(rng, cfg.omega_alpha, cfg.omega_beta);

    tape.clear();
    GradContext gctx(tape);
    TrajectoryBatch batch;
    ad::Var entropy_sum;
    for (int c = 0; c < cfg.g_candidates; ++c) {
      auto con = cnc_construct(gctx, pp, g, adj, cfg.problem, refs, omega,
                               cfg.k_max, rng, /*greedy=*/false);
      const double r = cnc_reward(con.solution, refs, omega, scale);
      batch.log_probs.push_back({con.log_prob});
      batch.rewards.push_back({r});
      entropy_sum = c == 0 ? con.entropy : nn::add(entropy_sum, con.entropy);
    }

    auto loss = pg_loss(batch, BaselineMode::GroupMean);
    if (cfg.entropy_coef > 0.0)
      loss = nn::sub(loss, nn::scale(entropy_sum, cfg.entropy_coef));
    tape.backward(loss);

    double reward_sum = 0.0;
    for (const auto& r : batch.rewards) reward_sum += r[0];
    const double mean_reward =
        reward_sum / static_cast<double>(cfg.g_candidates);
    const double loss_value = loss.scalar();
    if (!std::isfinite(loss_value))
      diverged("train_cnc", ep, loss_value, mean_reward);

    auto grads = zero_like(params);
    accumulate_grads(gctx, params, grads);
    for (auto& gm : grads) gm = -gm;
    ad::adam_step(params, grads, adam, cfg.lr);

    EpisodeMetrics m{ep, mean_reward, loss_value, std::nullopt};
    if (validation_due(cfg, ep)) m.validation = validate_cnc(pp, val_set, cfg);
    sink.write(m);
    result.metrics.push_back(std::move(m));
  }

  result.checkpoint.meta = {PolicyKind::Constructive, cfg.problem, cfg.k_max};
  result.checkpoint.params = std::move(pp);
  return result;
}

}  // namespace pbnco
