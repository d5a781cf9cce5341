#include "pbnco/search.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace pbnco {

RunMode parse_run_mode(const std::string& name) {
  if (name == "pbnco") return RunMode::PbNco;
  if (name == "cni_only") return RunMode::CniOnly;
  if (name == "level1_mem") return RunMode::Level1Mem;
  if (name == "random_restarts") return RunMode::RandomRestarts;
  if (name == "cnc_pop") return RunMode::CncPop;
  if (name == "uniform_walk") return RunMode::UniformWalk;
  throw std::invalid_argument("unknown run mode: " + name);
}

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::PbNco:
      return "pbnco";
    case RunMode::CniOnly:
      return "cni_only";
    case RunMode::Level1Mem:
      return "level1_mem";
    case RunMode::RandomRestarts:
      return "random_restarts";
    case RunMode::CncPop:
      return "cnc_pop";
    case RunMode::UniformWalk:
      return "uniform_walk";
  }
  return "pbnco";
}

namespace {

void validate_checkpoint(const Checkpoint* ck, PolicyKind kind,
                         Problem problem, const char* what) {
  if (!ck) throw std::invalid_argument(std::string(what) + " checkpoint required");
  if (ck->meta.kind != kind)
    throw std::invalid_argument(std::string(what) + " checkpoint has wrong policy kind");
  if (ck->meta.problem != problem)
    throw std::invalid_argument(std::string(what) + " checkpoint trained for a different problem");
}

/// Conditioning sets are capped at the checkpoint's K_max, keeping the
/// most recent entries.
std::vector<Bits> cap_refs(std::vector<Bits> refs, int k_max) {
  if (static_cast<int>(refs.size()) > k_max)
    refs.erase(refs.begin(), refs.end() - k_max);
  return refs;
}

}  // namespace

SearchResult pbnco_run(const GraphInstance& g, const Checkpoint* cni,
                       const Checkpoint* cnc, const SearchConfig& cfg,
                       Rng& rng) {
  const Problem problem = cfg.problem;
  if (cfg.population < 1)
    throw std::invalid_argument("pbnco_run: population must be >= 1");
  if (cfg.budget.max_steps < 0 && cfg.budget.wall_clock_seconds < 0.0)
    throw std::invalid_argument("pbnco_run: no budget given");

  const bool needs_cni =
      cfg.mode != RunMode::CncPop && cfg.mode != RunMode::UniformWalk;
  const bool patience_active =
      cfg.n_pat >= 0 &&
      (cfg.mode == RunMode::PbNco || cfg.mode == RunMode::Level1Mem ||
       cfg.mode == RunMode::RandomRestarts);
  const bool needs_cnc =
      cfg.mode == RunMode::CncPop || cfg.init == InitMode::Constructive ||
      (patience_active && (cfg.mode == RunMode::PbNco || cfg.mode == RunMode::Level1Mem));
  if (needs_cni) validate_checkpoint(cni, PolicyKind::Improvement, problem, "improvement");
  if (needs_cnc) validate_checkpoint(cnc, PolicyKind::Constructive, problem, "constructive");

  Adjacency adj(g);
  EvalContext ctx;
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };

  // Fraction of the budget consumed, for the restart omega schedule.
  auto progress = [&](std::int64_t step) {
    if (cfg.budget.max_steps > 0)
      return static_cast<double>(step) /
             static_cast<double>(cfg.budget.max_steps);
    if (cfg.budget.wall_clock_seconds > 0.0)
      return elapsed() / cfg.budget.wall_clock_seconds;
    return 0.0;
  };

  PopulationState state;
  state.individuals.resize(cfg.population);

  // Initial population. Constructive init ramps omega linearly from 0 to
  // 0.5 and conditions each construction on the ones built before it.
  std::vector<Bits> built;
  for (int i = 0; i < cfg.population; ++i) {
    Solution s;
    if (cfg.init == InitMode::Constructive) {
      const double om =
          cfg.population > 1
              ? 0.5 * static_cast<double>(i) / (cfg.population - 1)
              : 0.0;
      auto c = cnc_construct(ctx, cnc->params, g, adj, problem,
                             cap_refs(built, cnc->meta.k_max), om,
                             cnc->meta.k_max, rng, /*greedy=*/false);
      s = std::move(c.solution);
      built.push_back(s.bits);
    } else {
      s = random_solution(g, adj, problem, rng);
    }
    auto& ind = state.individuals[i];
    ind.best_value = s.objective;
    ind.best_bits = s.bits;
    ind.best_current_value = s.objective;
    ind.best_current_bits = s.bits;
    ind.current = std::move(s);
  }

  const bool private_memories = cfg.mode == RunMode::Level1Mem;
  SharedMemory shared(cfg.memory_capacity);
  std::vector<SharedMemory> privates;
  if (private_memories)
    privates.assign(cfg.population, SharedMemory(cfg.memory_capacity));

  DiversityTracker tracker(g.node_count);
  state.global_best = state.individuals[0].current;
  for (int i = 0; i < cfg.population; ++i) {
    const auto& s = state.individuals[i].current;
    (private_memories ? privates[i] : shared).insert(s);
    tracker.append(s.bits);
    if (s.objective > state.global_best.objective) state.global_best = s;
  }

  SearchResult result;
  auto record = [&](std::int64_t step) {
    double mean = 0.0;
    for (const auto& ind : state.individuals) mean += ind.current.objective;
    mean /= static_cast<double>(cfg.population);
    result.trace.points.push_back({step,
                                   cfg.record_wall_clock ? elapsed() : 0.0,
                                   state.global_best.objective, mean,
                                   tracker.value()});
  };
  record(0);

  auto target_hit = [&]() {
    return cfg.budget.target_objective &&
           state.global_best.objective >= *cfg.budget.target_objective - 1e-12;
  };

  std::vector<Bits> best_global_bits(cfg.population);
  std::vector<Bits> best_current_bits(cfg.population);

  std::int64_t t = 0;
  while (!target_hit()) {
    if (cfg.budget.max_steps >= 0 && t >= cfg.budget.max_steps) break;
    if (cfg.budget.wall_clock_seconds > 0.0 &&
        elapsed() >= cfg.budget.wall_clock_seconds)
      break;
    ++t;

    // Step-snapshot contract: every individual reads the memory as it was
    // at the start of the step; writes land at the barrier below.
    std::vector<Solution> writes;
    writes.reserve(cfg.population);

    if (cfg.mode == RunMode::CncPop) {
      const double om = omega_schedule(progress(t), 1.0, cfg.omega_start,
                                       cfg.phi);
      std::vector<Bits> refs;
      const int take = std::min(cfg.population, cnc->meta.k_max);
      refs.reserve(take);
      for (int i = 0; i < take; ++i)
        refs.push_back(state.individuals[i].current.bits);
      for (int i = 0; i < cfg.population; ++i) {
        auto c = cnc_construct(ctx, cnc->params, g, adj, problem, refs, om,
                               cnc->meta.k_max, rng, /*greedy=*/false);
        writes.push_back(std::move(c.solution));
      }
    } else {
      for (int i = 0; i < cfg.population; ++i) {
        auto& ind = state.individuals[i];
        if (patience_active && ind.patience >= cfg.n_pat) {
          Solution fresh;
          if (cfg.mode == RunMode::RandomRestarts) {
            fresh = random_solution(g, adj, problem, rng);
          } else {
            const double om =
                omega_schedule(progress(t), 1.0, cfg.omega_start, cfg.phi);
            for (int j = 0; j < cfg.population; ++j) {
              best_global_bits[j] = state.individuals[j].best_bits;
              best_current_bits[j] = state.individuals[j].best_current_bits;
            }
            std::vector<Bits> refs;
            if (private_memories) {
              refs = select_k(privates[i], {ind.best_bits},
                              {ind.best_current_bits}, cfg.select_strategy,
                              cfg.select_last_k);
            } else {
              refs = select_k(shared, best_global_bits, best_current_bits,
                              cfg.select_strategy, cfg.select_last_k);
            }
            auto c = cnc_construct(ctx, cnc->params, g, adj, problem,
                                   cap_refs(std::move(refs), cnc->meta.k_max),
                                   om, cnc->meta.k_max, rng, /*greedy=*/false);
            fresh = std::move(c.solution);
          }
          ind.patience = 0;
          ++ind.restarts;
          ind.best_current_value = fresh.objective;
          ind.best_current_bits = fresh.bits;
          if (fresh.objective > ind.best_value) {
            ind.best_value = fresh.objective;
            ind.best_bits = fresh.bits;
          }
          ind.current = fresh;
          writes.push_back(std::move(fresh));
        } else {
          Solution next;
          if (cfg.mode == RunMode::UniformWalk) {
            const auto actions = legal_actions(adj, ind.current);
            if (actions.empty())
              throw std::runtime_error("uniform walk: no legal action");
            const auto pick = rng.uniform_int(actions.size());
            next = apply_action(adj, ind.current, actions[pick]);
          } else {
            const SharedMemory& mem = private_memories ? privates[i] : shared;
            auto step = cni_step(ctx, cni->params, g, adj, ind.current, mem,
                                 cfg.knn_k, rng, /*greedy=*/false);
            next = std::move(step.next);
          }
          if (next.objective > ind.best_value) {
            ind.best_value = next.objective;
            ind.best_bits = next.bits;
            ind.patience = 0;
          } else {
            ++ind.patience;
          }
          if (next.objective > ind.best_current_value) {
            ind.best_current_value = next.objective;
            ind.best_current_bits = next.bits;
          }
          ind.current = next;
          writes.push_back(std::move(next));
        }
      }
    }

    // Barrier: apply writes in individual order, then update the best.
    for (int i = 0; i < cfg.population; ++i) {
      (private_memories ? privates[i] : shared).insert(writes[i]);
      tracker.append(writes[i].bits);
      if (writes[i].objective > state.global_best.objective)
        state.global_best = writes[i];
    }
    if (cfg.mode == RunMode::CncPop) {
      for (int i = 0; i < cfg.population; ++i) {
        auto& ind = state.individuals[i];
        ind.current = writes[i];
        if (writes[i].objective > ind.best_value) {
          ind.best_value = writes[i].objective;
          ind.best_bits = writes[i].bits;
        }
      }
    }
    state.step = t;
    record(t);
  }

  result.best = state.global_best;
  result.steps = t;
  result.restarts.reserve(cfg.population);
  for (const auto& ind : state.individuals)
    result.restarts.push_back(ind.restarts);
  return result;
}

std::vector<double> diversity_protocol(const GraphInstance& g,
                                       const Checkpoint& cnc, double omega,
                                       int count, int init_population,
                                       bool zero_conditioning,
                                       std::uint64_t seed) {
  validate_checkpoint(&cnc, PolicyKind::Constructive, cnc.meta.problem,
                      "constructive");
  Rng rng(seed);
  Adjacency adj(g);
  EvalContext ctx;
  std::vector<Bits> history;
  history.reserve(static_cast<std::size_t>(init_population) + count);

  // Diversity is measured over the entire visited history, seed
  // population included, so curves at different omega share a common
  // starting level.
  DiversityTracker tracker(g.node_count);
  for (int i = 0; i < init_population; ++i) {
    history.push_back(random_solution(g, adj, cnc.meta.problem, rng).bits);
    tracker.append(history.back());
  }
  std::vector<double> curve;
  curve.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<Bits> refs;
    if (!zero_conditioning) {
      refs.assign(history.end() -
                      std::min<std::size_t>(cnc.meta.k_max, history.size()),
                  history.end());
    }
    auto c = cnc_construct(ctx, cnc.params, g, adj, cnc.meta.problem, refs,
                           omega, cnc.meta.k_max, rng, /*greedy=*/false);
    history.push_back(c.solution.bits);
    tracker.append(c.solution.bits);
    curve.push_back(tracker.value());
  }
  return curve;
}

ParetoPoint pareto_point(const GraphInstance& g, const Checkpoint& cnc,
                         double omega, int refs_count, int samples,
                         std::uint64_t seed) {
  validate_checkpoint(&cnc, PolicyKind::Constructive, cnc.meta.problem,
                      "constructive");
  Rng rng(seed);
  Adjacency adj(g);
  EvalContext ctx;
  const Problem problem = cnc.meta.problem;
  const RewardScale scale = reward_scale(g, problem);

  std::vector<Bits> refs;
  refs.reserve(refs_count);
  for (int i = 0; i < refs_count; ++i)
    refs.push_back(random_solution(g, adj, problem, rng).bits);

  ParetoPoint pt;
  pt.omega = omega;
  for (int s = 0; s < samples; ++s) {
    auto c = cnc_construct(ctx, cnc.params, g, adj, problem, refs, omega,
                           cnc.meta.k_max, rng, /*greedy=*/false);
    pt.mean_quality += scale.normalize(c.solution.objective);
    double dist = 0.0;
    for (const auto& m : refs) dist += hamming_normalized(c.solution.bits, m);
    if (!refs.empty()) dist /= static_cast<double>(refs.size());
    pt.mean_diversity += dist;
  }
  pt.mean_quality /= static_cast<double>(samples);
  pt.mean_diversity /= static_cast<double>(samples);
  return pt;
}

}  // namespace pbnco
