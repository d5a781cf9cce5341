#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pbnco/cnc.hpp"
#include "pbnco/cni.hpp"

namespace pbnco {

/// Episode batch for the policy-gradient loss. Trajectories may have
/// different lengths under GroupMean; TimestepMean requires equal
/// lengths. Entries are aligned: rewards[i][t] follows log_probs[i][t].
struct TrajectoryBatch {
  std::vector<std::vector<ad::Var>> log_probs;
  std::vector<std::vector<double>> rewards;
  double gamma = 1.0;
};

enum class BaselineMode {
  TimestepMean,  // baseline_t = mean over trajectories of G_t
  GroupMean,     // baseline = mean over trajectories of G_0
};

/// Discounted suffix sums G_t = sum_{t'>=t} gamma^(t'-t) r_t'.
std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double gamma);

/// Advantage table (returns minus baseline), same shape as the batch.
std::vector<std::vector<double>> batch_advantages(const TrajectoryBatch& batch,
                                                  BaselineMode mode);

/// REINFORCE surrogate -sum_i,t log pi(a_it) * A_it. Advantages enter as
/// constants; the gradient flows only through the log-probabilities.
ad::Var pg_loss(const TrajectoryBatch& batch, BaselineMode mode);

struct TrainConfig {
  Problem problem = Problem::MaxCut;

  // policy network (desk-scale defaults; paper-scale dim 64 / heads 8 /
  // ff 256 available by config)
  int layers = 3;
  int dim = 32;
  int heads = 4;
  int ff_dim = 128;
  bool dense_attention = false;

  int episodes = 500;
  double lr = 1e-4;
  double gamma = 0.95;            // cNI return discount
  double w_rep = kDefaultWRep;    // cNI repetition penalty weight
  bool normalized_reward = true;
  bool natural_log_scale = true;

  int population = 8;   // cNI trajectories per episode
  int t_train = -1;     // cNI steps per trajectory; -1 means 2|V|

  int n_min = 20;       // instance size range, sampled uniformly
  int n_max = 60;
  double er_p = 0.15;

  int g_candidates = 8;  // cNC candidate group size
  int k_max = kDefaultKMax;
  int knn_k = kDefaultKnnK;
  double omega_alpha = kDefaultOmegaAlpha;
  double omega_beta = kDefaultOmegaBeta;

  double entropy_coef = 0.0;  // 0 disables the entropy bonus

  std::uint64_t seed = 0;
  int validation_every = 25;     // 0 disables periodic validation
  int validation_instances = 4;  // held-out ER(n_max, er_p) instances
  std::string metrics_path;      // JSONL sink, empty disables
};

struct EpisodeMetrics {
  int episode = 0;
  double mean_reward = 0.0;
  double loss = 0.0;
  std::optional<double> validation;  // mean normalized greedy objective
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpisodeMetrics> metrics;
};

/// REINFORCE over improvement trajectories: each episode samples an ER
/// instance, rolls `population` trajectories of T_train steps from random
/// solutions with an initially empty shared memory (writes at step
/// barriers), and updates with the per-timestep population-mean baseline.
/// Throws on non-finite loss.
TrainResult train_cni(const TrainConfig& cfg);

/// REINFORCE over one-shot constructions: each episode samples an ER
/// instance, a synthetic conditioning set (|K| uniform on {0..K_max},
/// members random solutions) and omega ~ Beta(alpha, beta), scores
/// g_candidates constructions with cnc_reward, and updates with the
/// group-mean baseline. Throws on non-finite loss.
TrainResult train_cnc(const TrainConfig& cfg);

}  // namespace pbnco
