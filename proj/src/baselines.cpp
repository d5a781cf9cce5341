#include "pbnco/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pbnco {

namespace {

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<std::uint64_t>(i) + 1);
    std::swap(perm[i], perm[static_cast<int>(j)]);
  }
  return perm;
}

/// Feasibility repair for MIS bit vectors: drop active nodes that still
/// have an active neighbor (random order), then activate whatever fits
/// (random order). Output is feasible and maximal.
void repair_mis(Bits& bits, const Adjacency& adj, Rng& rng) {
  const int n = static_cast<int>(bits.size());
  for (int u : random_permutation(n, rng)) {
    if (!bits[u]) continue;
    for (int v : adj.neighbors[u]) {
      if (bits[v]) {
        bits[u] = 0;
        break;
      }
    }
  }
  for (int u : random_permutation(n, rng)) {
    if (bits[u]) continue;
    bool blocked = false;
    for (int v : adj.neighbors[u])
      if (bits[v]) {
        blocked = true;
        break;
      }
    if (!blocked) bits[u] = 1;
  }
}

}  // namespace

Solution greedy_mc(const GraphInstance& g) {
  Adjacency adj(g);
  Bits bits(g.node_count, 0);
  std::vector<double> gain(g.node_count, 0.0);
  for (int u = 0; u < g.node_count; ++u)
    for (double w : adj.neighbor_weights[u]) gain[u] += w;

  for (;;) {
    int pick = -1;
    for (int u = 0; u < g.node_count; ++u)
      if (gain[u] > 0.0 && (pick < 0 || gain[u] > gain[pick])) pick = u;
    if (pick < 0) break;
    const auto& nbrs = adj.neighbors[pick];
    const auto& ws = adj.neighbor_weights[pick];
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const bool crossing = bits[pick] != bits[nbrs[i]];
      gain[nbrs[i]] += crossing ? 2.0 * ws[i] : -2.0 * ws[i];
    }
    bits[pick] ^= 1;
    gain[pick] = -gain[pick];
  }
  return make_solution(g, Problem::MaxCut, std::move(bits));
}

Solution greedy_mis(const GraphInstance& g) {
  Adjacency adj(g);
  const int n = g.node_count;
  Bits bits(n, 0);
  std::vector<char> remaining(n, 1);
  std::vector<int> degree(n, 0);
  for (int u = 0; u < n; ++u) degree[u] = adj.degree(u);

  auto remove_node = [&](int u) {
    remaining[u] = 0;
    for (int v : adj.neighbors[u])
      if (remaining[v]) --degree[v];
  };

  for (;;) {
    int pick = -1;
    for (int u = 0; u < n; ++u)
      if (remaining[u] && (pick < 0 || degree[u] < degree[pick])) pick = u;
    if (pick < 0) break;
    bits[pick] = 1;
    remove_node(pick);
    for (int v : adj.neighbors[pick])
      if (remaining[v]) remove_node(v);
  }
  return make_solution(g, Problem::Mis, std::move(bits));
}

Solution greedy_baseline(const GraphInstance& g, Problem problem) {
  return problem == Problem::MaxCut ? greedy_mc(g) : greedy_mis(g);
}

BaselineResult ga_run(const GraphInstance& g, Problem problem,
                      const GaConfig& config, int generations,
                      std::uint64_t seed) {
  if (config.population < 2)
    throw std::invalid_argument("ga_run: population must be >= 2");
  Rng rng(seed);
  Adjacency adj(g);
  const int n = g.node_count;
  const double mut =
      config.mutation_rate < 0.0 ? 1.0 / n : config.mutation_rate;

  std::vector<Solution> pop;
  pop.reserve(config.population);
  for (int i = 0; i < config.population; ++i)
    pop.push_back(random_solution(g, adj, problem, rng));

  DiversityTracker tracker(n);
  Solution best = pop[0];
  for (const auto& s : pop) {
    tracker.append(s.bits);
    if (s.objective > best.objective) best = s;
  }

  AnytimeTrace trace;
  auto record = [&](int step) {
    double mean = 0.0;
    for (const auto& s : pop) mean += s.objective;
    mean /= static_cast<double>(pop.size());
    trace.points.push_back({step, 0.0, best.objective, mean, tracker.value()});
  };
  record(0);

  auto tournament = [&]() -> const Solution& {
    int winner = static_cast<int>(rng.uniform_int(pop.size()));
    for (int t = 1; t < config.tournament; ++t) {
      const int cand = static_cast<int>(rng.uniform_int(pop.size()));
      if (pop[cand].objective > pop[winner].objective) winner = cand;
    }
    return pop[winner];
  };

  for (int gen = 1; gen <= generations; ++gen) {
    std::vector<int> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return pop[a].objective > pop[b].objective;
    });

    std::vector<Solution> next;
    next.reserve(pop.size());
    for (int e = 0; e < config.elitism && e < static_cast<int>(pop.size()); ++e)
      next.push_back(pop[order[e]]);

    while (next.size() < pop.size()) {
      const Solution& p1 = tournament();
      const Solution& p2 = tournament();
      Bits child = p1.bits;
      if (rng.uniform() < config.crossover_rate)
        for (int u = 0; u < n; ++u)
          if (rng.bernoulli(0.5)) child[u] = p2.bits[u];
      for (int u = 0; u < n; ++u)
        if (rng.uniform() < mut) child[u] ^= 1;
      if (problem == Problem::Mis) repair_mis(child, adj, rng);
      Solution s = make_solution(g, problem, std::move(child));
      tracker.append(s.bits);
      if (s.objective > best.objective) best = s;
      next.push_back(std::move(s));
    }
    pop = std::move(next);
    record(gen);
  }
  return {std::move(best), std::move(trace)};
}

BaselineResult pso_run(const GraphInstance& g, Problem problem,
                       const PsoConfig& config, int iterations,
                       std::uint64_t seed) {
  if (config.swarm < 2)
    throw std::invalid_argument("pso_run: swarm must be >= 2");
  Rng rng(seed);
  Adjacency adj(g);
  const int n = g.node_count;

  std::vector<Solution> pos;
  pos.reserve(config.swarm);
  for (int i = 0; i < config.swarm; ++i)
    pos.push_back(random_solution(g, adj, problem, rng));
  std::vector<std::vector<double>> vel(
      config.swarm, std::vector<double>(static_cast<std::size_t>(n), 0.0));

  std::vector<Solution> pbest = pos;
  Solution gbest = pos[0];
  for (const auto& s : pos)
    if (s.objective > gbest.objective) gbest = s;

  DiversityTracker tracker(n);
  for (const auto& s : pos) tracker.append(s.bits);

  AnytimeTrace trace;
  auto record = [&](int step) {
    double mean = 0.0;
    for (const auto& s : pos) mean += s.objective;
    mean /= static_cast<double>(pos.size());
    trace.points.push_back(
        {step, 0.0, gbest.objective, mean, tracker.value()});
  };
  record(0);

  for (int it = 1; it <= iterations; ++it) {
    // Synchronous update: all particles see the previous iteration's gbest.
    const Solution snapshot_gbest = gbest;
    for (int i = 0; i < config.swarm; ++i) {
      Bits bits(n, 0);
      for (int u = 0; u < n; ++u) {
        const double x = static_cast<double>(pos[i].bits[u]);
        const double pb = static_cast<double>(pbest[i].bits[u]);
        const double gb = static_cast<double>(snapshot_gbest.bits[u]);
        double v = config.inertia * vel[i][u] +
                   config.c1 * rng.uniform() * (pb - x) +
                   config.c2 * rng.uniform() * (gb - x);
        v = std::clamp(v, -config.v_clamp, config.v_clamp);
        vel[i][u] = v;
        bits[u] = rng.bernoulli(sigmoid(v)) ? 1 : 0;
      }
      if (problem == Problem::Mis) repair_mis(bits, adj, rng);
      pos[i] = make_solution(g, problem, std::move(bits));
      tracker.append(pos[i].bits);
      if (pos[i].objective > pbest[i].objective) pbest[i] = pos[i];
    }
    for (const auto& s : pos)
      if (s.objective > gbest.objective) gbest = s;
    record(it);
  }
  return {std::move(gbest), std::move(trace)};
}

namespace {

BruteForceResult brute_force_mc(const GraphInstance& g) {
  if (g.node_count > 22)
    throw std::invalid_argument("brute_force: MC supports |V| <= 22, got " +
                                std::to_string(g.node_count));
  Adjacency adj(g);
  const int n = g.node_count;
  Bits bits(n, 0);
  Bits best_bits = bits;
  double cut = 0.0, best = 0.0;
  // Gray-code walk over the 2^(n-1) assignments with bit 0 fixed; each
  // step flips one bit and adjusts the cut incrementally.
  const std::uint64_t total = n > 1 ? (1ULL << (n - 1)) : 1;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int u = std::countr_zero(i) + 1;
    double delta = 0.0;
    const auto& nbrs = adj.neighbors[u];
    const auto& ws = adj.neighbor_weights[u];
    for (std::size_t e = 0; e < nbrs.size(); ++e)
      delta += bits[u] != bits[nbrs[e]] ? -ws[e] : ws[e];
    bits[u] ^= 1;
    cut += delta;
    if (cut > best) {
      best = cut;
      best_bits = bits;
    }
  }
  BruteForceResult r;
  r.optimum = best;
  r.argmax = make_solution(g, Problem::MaxCut, std::move(best_bits));
  return r;
}

struct MisSearch {
  std::vector<std::uint64_t> nbr;
  int best_count = -1;
  std::uint64_t best_chosen = 0;

  void dfs(std::uint64_t remaining, int count, std::uint64_t chosen) {
    if (count + std::popcount(remaining) <= best_count) return;
    if (remaining == 0) {
      best_count = count;
      best_chosen = chosen;
      return;
    }
    // Pivot on the max-degree remaining node; isolated remainders are
    // all taken at once.
    int pivot = -1, pivot_deg = -1;
    for (std::uint64_t m = remaining; m != 0; m &= m - 1) {
      const int u = std::countr_zero(m);
      const int deg = std::popcount(nbr[u] & remaining);
      if (deg > pivot_deg) {
        pivot_deg = deg;
        pivot = u;
      }
    }
    if (pivot_deg == 0) {
      const int total = count + std::popcount(remaining);
      if (total > best_count) {
        best_count = total;
        best_chosen = chosen | remaining;
      }
      return;
    }
    const std::uint64_t ubit = 1ULL << pivot;
    dfs(remaining & ~(nbr[pivot] | ubit), count + 1, chosen | ubit);
    dfs(remaining & ~ubit, count, chosen);
  }
};

BruteForceResult brute_force_mis(const GraphInstance& g) {
  if (g.node_count > 26)
    throw std::invalid_argument("brute_force: MIS supports |V| <= 26, got " +
                                std::to_string(g.node_count));
  MisSearch search;
  search.nbr.assign(g.node_count, 0);
  for (const auto& [u, v] : g.edges) {
    search.nbr[u] |= 1ULL << v;
    search.nbr[v] |= 1ULL << u;
  }
  const std::uint64_t all =
      g.node_count == 64 ? ~0ULL : (1ULL << g.node_count) - 1;
  search.dfs(all, 0, 0);

  Bits bits(g.node_count, 0);
  for (int u = 0; u < g.node_count; ++u)
    if (search.best_chosen & (1ULL << u)) bits[u] = 1;
  BruteForceResult r;
  r.optimum = static_cast<double>(search.best_count);
  r.argmax = make_solution(g, Problem::Mis, std::move(bits));
  return r;
}

}  // namespace

BruteForceResult brute_force(const GraphInstance& g, Problem problem) {
  return problem == Problem::MaxCut ? brute_force_mc(g) : brute_force_mis(g);
}

}  // namespace pbnco
