#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include "pbnco/baselines.hpp"
#include "test_util.hpp"

using namespace pbnco;

namespace {

// Exhaustive reference optimizer, O(2^n), for cross-checking.
double naive_optimum(const GraphInstance& g, Problem problem) {
  const int n = g.node_count;
  REQUIRE(n <= 12);
  double best = problem == Problem::Mis ? 0.0 : -1.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Bits bits(n, 0);
    for (int u = 0; u < n; ++u) bits[u] = (mask >> u) & 1;
    if (problem == Problem::Mis && !mis_is_feasible(g, bits)) continue;
    best = std::max(best, objective_value(g, problem, bits));
  }
  return best;
}

}  // namespace

TEST_CASE("greedy max-cut on small named graphs") {
  CHECK(greedy_mc(testutil::k3()).objective == 2.0);
  CHECK(greedy_mc(testutil::cycle(4)).objective == 4.0);
  CHECK(greedy_mc(testutil::cycle(5)).objective == 4.0);
  CHECK(greedy_mc(testutil::star(4)).objective == 4.0);
  const Solution s = greedy_mc(testutil::cycle(4));
  CHECK(s.objective == mc_objective(testutil::cycle(4), s.bits));
}

TEST_CASE("greedy mis on small named graphs") {
  CHECK(greedy_mis(testutil::k3()).objective == 1.0);
  CHECK(greedy_mis(testutil::path3()).objective == 2.0);
  CHECK(greedy_mis(testutil::cycle(5)).objective == 2.0);
  CHECK(greedy_mis(testutil::star(6)).objective == 6.0);
  const Solution s = greedy_mis(testutil::cycle(5));
  CHECK(mis_is_feasible(testutil::cycle(5), s.bits));
}

TEST_CASE("greedy_baseline dispatches on the problem") {
  CHECK(greedy_baseline(testutil::k3(), Problem::MaxCut).objective == 2.0);
  CHECK(greedy_baseline(testutil::k3(), Problem::Mis).objective == 1.0);
}

TEST_CASE("brute_force on known optima") {
  CHECK(brute_force(testutil::k3(), Problem::MaxCut).optimum == 2.0);
  CHECK(brute_force(testutil::cycle(5), Problem::MaxCut).optimum == 4.0);
  CHECK(brute_force(testutil::cycle(5), Problem::Mis).optimum == 2.0);
  CHECK(brute_force(testutil::star(5), Problem::Mis).optimum == 5.0);

  const BruteForceResult r = brute_force(testutil::cycle(5), Problem::MaxCut);
  CHECK(r.argmax.objective == r.optimum);
  CHECK(mc_objective(testutil::cycle(5), r.argmax.bits) == r.optimum);
}

TEST_CASE("brute_force matches naive enumeration on random graphs") {
  for (int trial = 0; trial < 20; ++trial) {
    const GraphInstance g = generate_er(10, 0.3, 700 + trial);
    for (Problem p : {Problem::MaxCut, Problem::Mis}) {
      const BruteForceResult r = brute_force(g, p);
      CHECK(r.optimum == naive_optimum(g, p));
      CHECK(r.argmax.objective == r.optimum);
      if (p == Problem::Mis) CHECK(mis_is_feasible(g, r.argmax.bits));
    }
  }
}

TEST_CASE("brute_force on a weighted instance") {
  const GraphInstance g =
      testutil::make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, {5.0, 1.0, 5.0});
  // {1,0,1,0} cuts all three edges: 11.
  CHECK(brute_force(g, Problem::MaxCut).optimum == 11.0);
}

TEST_CASE("brute_force refuses oversized instances") {
  GraphInstance big_mc;
  big_mc.node_count = 23;
  CHECK_THROWS_AS(brute_force(big_mc, Problem::MaxCut), std::invalid_argument);
  GraphInstance big_mis;
  big_mis.node_count = 27;
  CHECK_THROWS_AS(brute_force(big_mis, Problem::Mis), std::invalid_argument);
  GraphInstance ok;
  ok.node_count = 26;
  CHECK(brute_force(ok, Problem::Mis).optimum == 26.0);
}

TEST_CASE("ga: monotone best, feasible, within the optimum, deterministic") {
  for (Problem p : {Problem::MaxCut, Problem::Mis}) {
    const GraphInstance g = generate_er(14, 0.3, 19);
    const double opt = brute_force(g, p).optimum;
    const BaselineResult a = ga_run(g, p, {}, 30, 5);
    const BaselineResult b = ga_run(g, p, {}, 30, 5);
    const BaselineResult c = ga_run(g, p, {}, 30, 6);

    REQUIRE(a.trace.points.size() == 31);
    for (std::size_t i = 1; i < a.trace.points.size(); ++i) {
      CHECK(a.trace.points[i].best_objective >=
            a.trace.points[i - 1].best_objective);
      CHECK(a.trace.points[i].step == static_cast<std::int64_t>(i));
    }
    CHECK(a.best.objective == a.trace.points.back().best_objective);
    CHECK(a.best.objective <= opt);
    CHECK(a.best.objective ==
          doctest::Approx(objective_value(g, p, a.best.bits)));
    if (p == Problem::Mis) CHECK(mis_is_feasible(g, a.best.bits));

    CHECK(trace_to_csv(a.trace) == trace_to_csv(b.trace));
    CHECK(a.best == b.best);
    CHECK(trace_to_csv(a.trace) != trace_to_csv(c.trace));
  }
}

TEST_CASE("pso: monotone best, feasible, within the optimum, deterministic") {
  for (Problem p : {Problem::MaxCut, Problem::Mis}) {
    const GraphInstance g = generate_er(14, 0.3, 23);
    const double opt = brute_force(g, p).optimum;
    const BaselineResult a = pso_run(g, p, {}, 30, 5);
    const BaselineResult b = pso_run(g, p, {}, 30, 5);

    REQUIRE(a.trace.points.size() == 31);
    for (std::size_t i = 1; i < a.trace.points.size(); ++i)
      CHECK(a.trace.points[i].best_objective >=
            a.trace.points[i - 1].best_objective);
    CHECK(a.best.objective <= opt);
    if (p == Problem::Mis) CHECK(mis_is_feasible(g, a.best.bits));
    CHECK(trace_to_csv(a.trace) == trace_to_csv(b.trace));
  }
}

TEST_CASE("ga and pso find the optimum of easy instances") {
  const GraphInstance g = generate_er(10, 0.4, 77);
  for (Problem p : {Problem::MaxCut, Problem::Mis}) {
    const double opt = brute_force(g, p).optimum;
    CHECK(ga_run(g, p, {}, 60, 3).best.objective == opt);
    CHECK(pso_run(g, p, {}, 60, 3).best.objective == opt);
  }
}

TEST_CASE("ga validates its configuration") {
  GaConfig bad;
  bad.population = 1;
  CHECK_THROWS_AS(ga_run(testutil::k3(), Problem::MaxCut, bad, 5, 0),
                  std::invalid_argument);
  PsoConfig bad_pso;
  bad_pso.swarm = 1;
  CHECK_THROWS_AS(pso_run(testutil::k3(), Problem::MaxCut, bad_pso, 5, 0),
                  std::invalid_argument);
}
