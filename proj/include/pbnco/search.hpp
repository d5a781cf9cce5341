#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbnco/cnc.hpp"
#include "pbnco/cni.hpp"
#include "pbnco/gnn.hpp"
#include "pbnco/memory.hpp"
#include "pbnco/trace.hpp"

namespace pbnco {

enum class RunMode {
  PbNco,           // improvement steps + patience-triggered cNC restarts
  CniOnly,         // shared memory, restarts disabled
  Level1Mem,       // private per-individual memories
  RandomRestarts,  // restarts draw random solutions instead of cNC
  CncPop,          // pure construction: population re-sampled each step
  UniformWalk      // uniform-random legal action; evaluation baseline
};

RunMode parse_run_mode(const std::string& name);
const char* run_mode_name(RunMode m);

enum class InitMode { Random, Constructive };

struct Budget {
  std::int64_t max_steps = -1;        // population steps; < 0 = unbounded
  double wall_clock_seconds = -1.0;   // < 0 = unbounded
  std::optional<double> target_objective;  // stop once best >= target
};

struct SearchConfig {
  Problem problem = Problem::MaxCut;
  RunMode mode = RunMode::PbNco;
  InitMode init = InitMode::Random;
  int population = 20;
  std::int64_t n_pat = 500;  // < 0 = infinite patience
  double omega_start = 1.0;
  double phi = 1.0;
  SelectKStrategy select_strategy = SelectKStrategy::Last;
  int select_last_k = kDefaultKMax;  // k for the Last strategy
  int knn_k = kDefaultKnnK;
  std::size_t memory_capacity = kDefaultMemoryCapacity;
  Budget budget;
  bool record_wall_clock = false;  // keep elapsed at 0.0 for byte-stable traces
};

struct IndividualState {
  Solution current;
  double best_value = 0.0;        // B^(i), never reset
  Bits best_bits;                 // argmax of this individual's history
  double best_current_value = 0.0;  // best since last restart
  Bits best_current_bits;
  std::int64_t patience = 0;      // consecutive non-improving steps
  std::int64_t restarts = 0;
};

struct PopulationState {
  std::vector<IndividualState> individuals;
  Solution global_best;
  std::int64_t step = 0;
};

struct SearchResult {
  Solution best;
  AnytimeTrace trace;
  std::vector<std::int64_t> restarts;
  std::int64_t steps = 0;
};

/// Population search: P individuals advance in lock-step; within a step
/// every individual reads the same memory snapshot and writes are applied
/// at the step barrier in individual order. cni may be null only for
/// CncPop and UniformWalk; cnc may be null for modes that never
/// construct (CniOnly, RandomRestarts, UniformWalk, and PbNco with
/// infinite patience plus Random init).
SearchResult pbnco_run(const GraphInstance& g, const Checkpoint* cni,
                       const Checkpoint* cnc, const SearchConfig& config,
                       Rng& rng);

/// Diversity study protocol: fix a random initial population, then
/// generate `count` solutions one at a time at the given omega,
/// conditioning each construction on the most recent k_max history
/// entries (or nothing when zero_conditioning). Returns the diversity
/// curve over the generated solutions.
std::vector<double> diversity_protocol(const GraphInstance& g,
                                       const Checkpoint& cnc, double omega,
                                       int count, int init_population,
                                       bool zero_conditioning,
                                       std::uint64_t seed);

struct ParetoPoint {
  double omega = 0.0;
  double mean_quality = 0.0;    // mean normalized objective of samples
  double mean_diversity = 0.0;  // mean normalized Hamming to the refs
};

/// One omega setting on one instance: condition on refs_count random
/// solutions, draw `samples` constructions, average the two reward
/// components.
ParetoPoint pareto_point(const GraphInstance& g, const Checkpoint& cnc,
                         double omega, int refs_count, int samples,
                         std::uint64_t seed);

}  // namespace pbnco
