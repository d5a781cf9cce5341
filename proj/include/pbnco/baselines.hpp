#pragma once

#include <cstdint>

#include "pbnco/graph.hpp"
#include "pbnco/problems.hpp"
#include "pbnco/trace.hpp"

namespace pbnco {

/// MC: from all-zeros, repeatedly flip the node with the largest positive
/// cut gain (lowest index on ties) until no flip gains.
Solution greedy_mc(const GraphInstance& g);

/// MIS: repeatedly take the feasible node with minimum degree in the
/// remaining graph (lowest index on ties).
Solution greedy_mis(const GraphInstance& g);

Solution greedy_baseline(const GraphInstance& g, Problem problem);

struct GaConfig {
  int population = 20;
  int tournament = 2;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // < 0 means 1/|V|
  int elitism = 1;
};

struct PsoConfig {
  int swarm = 20;
  double inertia = 0.7;
  double c1 = 1.5;
  double c2 = 1.5;
  double v_clamp = 4.0;
};

struct BaselineResult {
  Solution best;
  AnytimeTrace trace;
};

/// Generational GA: tournament selection, uniform crossover, per-bit
/// mutation, elitism. MIS offspring are repaired (drop violating
/// endpoints in random order, then saturate to maximality in random
/// order). Deterministic given seed.
BaselineResult ga_run(const GraphInstance& g, Problem problem,
                      const GaConfig& config, int generations,
                      std::uint64_t seed);

/// Binary PSO: per-bit velocity v <- w v + c1 r1 (pbest-x) + c2 r2
/// (gbest-x), clamped, bit resampled as Bernoulli(sigmoid(v)). MIS
/// positions repaired as in the GA. Deterministic given seed.
BaselineResult pso_run(const GraphInstance& g, Problem problem,
                       const PsoConfig& config, int iterations,
                       std::uint64_t seed);

struct BruteForceResult {
  double optimum = 0.0;
  Solution argmax;
};

/// Exact optimum. MC enumerates 2^(|V|-1) assignments with bit 0 fixed
/// (complement symmetry), |V| <= 22; MIS branches include/exclude with
/// pruning, |V| <= 26. Throws on larger instances.
BruteForceResult brute_force(const GraphInstance& g, Problem problem);

}  // namespace pbnco
