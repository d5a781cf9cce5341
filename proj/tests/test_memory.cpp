#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "pbnco/memory.hpp"
#include "pbnco/rng.hpp"
#include "test_util.hpp"

using namespace pbnco;

namespace {

Bits random_bits(int n, Rng& rng) {
  Bits b(n);
  for (auto& x : b) x = rng.bernoulli(0.5) ? 1 : 0;
  return b;
}

// Reference k-nn recompute, structured differently from the library: full
// sort of (distance, insertion index) pairs instead of a partial select.
Eigen::VectorXd knn_reference(const std::deque<MemoryEntry>& entries,
                              const Bits& query, int k, double eps = 1e-9) {
  const int n = static_cast<int>(query.size());
  if (entries.empty()) return Eigen::VectorXd::Zero(n);
  std::vector<std::pair<double, std::uint64_t>> order;
  for (const auto& e : entries)
    order.push_back({hamming_normalized(e.bits, query), e.insertion_index});
  std::sort(order.begin(), order.end());
  const int kk = std::min<int>(k, static_cast<int>(order.size()));

  double dmin = order[0].first, dmax = order[kk - 1].first;
  std::vector<double> w(kk);
  double wsum = 0.0;
  for (int j = 0; j < kk; ++j) {
    const double dn = (order[j].first - dmin) / (dmax - dmin + eps);
    w[j] = 1.0 - dn;
    wsum += w[j];
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < kk; ++j) {
    for (const auto& e : entries) {
      if (e.insertion_index != order[j].second) continue;
      for (int u = 0; u < n; ++u) z(u) += w[j] / wsum * e.bits[u];
      break;
    }
  }
  return z;
}

}  // namespace

TEST_CASE("fifo eviction drops the oldest entry at capacity") {
  SharedMemory mem(3);
  mem.insert({0, 0}, 0.0);
  mem.insert({0, 1}, 1.0);
  mem.insert({1, 0}, 1.0);
  CHECK(mem.size() == 3);
  CHECK(mem.contains({0, 0}));

  mem.insert({1, 1}, 2.0);
  CHECK(mem.size() == 3);
  CHECK_FALSE(mem.contains({0, 0}));
  CHECK(mem.contains({0, 1}));
  CHECK(mem.contains({1, 1}));
  CHECK(mem.entries().front().bits == Bits{0, 1});
  CHECK(mem.entries().back().insertion_index == 3);
  CHECK(mem.next_insertion_index() == 4);
}

TEST_CASE("duplicate bits stay members until every copy is evicted") {
  SharedMemory mem(3);
  mem.insert({1, 0}, 1.0);
  mem.insert({1, 0}, 1.0);
  mem.insert({0, 0}, 0.0);
  CHECK(mem.contains({1, 0}));
  mem.insert({0, 1}, 1.0);  // evicts the first {1,0}, one copy remains
  CHECK(mem.contains({1, 0}));
  mem.insert({1, 1}, 2.0);  // evicts the second {1,0}
  CHECK_FALSE(mem.contains({1, 0}));
}

TEST_CASE("knn descriptor of a single stored solution is that solution") {
  SharedMemory mem;
  mem.insert({1, 0, 1, 0}, 2.0);
  const Eigen::VectorXd z = mem.knn_descriptor({0, 0, 0, 0}, 20);
  CHECK(z == Eigen::Vector4d(1, 0, 1, 0));
}

TEST_CASE("knn descriptor is zero when the memory is empty") {
  SharedMemory mem;
  CHECK(mem.knn_descriptor({1, 1, 1}, 5) == Eigen::Vector3d::Zero());
}

TEST_CASE("equidistant neighbors average uniformly") {
  SharedMemory mem;
  // Both entries at normalized distance 1/4 from the query.
  mem.insert({1, 0, 0, 0}, 1.0);
  mem.insert({0, 1, 0, 0}, 1.0);
  const Eigen::VectorXd z = mem.knn_descriptor({0, 0, 0, 0}, 2);
  CHECK(z(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z(2) == 0.0);
}

TEST_CASE("nearer neighbors dominate the descriptor") {
  SharedMemory mem;
  mem.insert({1, 1, 1, 1}, 4.0);  // distance 1 from query 0000
  mem.insert({1, 0, 0, 0}, 1.0);  // distance 1/4
  const Eigen::VectorXd z = mem.knn_descriptor({0, 0, 0, 0}, 2);
  // Min-max normalization gives the far entry weight ~0, the near one ~1.
  CHECK(z(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(z(1) == doctest::Approx(0.0).epsilon(1e-6));
  const Eigen::VectorXd ref = knn_reference(mem.entries(), {0, 0, 0, 0}, 2);
  CHECK(testutil::max_rel_error(z, ref) <= 1e-12);
}

TEST_CASE("knn distance ties prefer older entries") {
  SharedMemory mem;
  mem.insert({1, 0, 0, 0}, 1.0);  // older, distance 1/4
  mem.insert({0, 1, 0, 0}, 1.0);  // same distance
  mem.insert({0, 0, 1, 0}, 1.0);  // same distance
  const Eigen::VectorXd z = mem.knn_descriptor({0, 0, 0, 0}, 2);
  // k=2 must pick the two oldest of the three tied entries.
  CHECK(z(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(z(2) == 0.0);
}

TEST_CASE("knn descriptor matches the reference on random memories") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    SharedMemory mem;
    const int n = 12;
    const int count = 1 + static_cast<int>(rng.uniform_int(40));
    for (int i = 0; i < count; ++i) mem.insert(random_bits(n, rng), 0.0);
    const Bits query = random_bits(n, rng);
    for (int k : {1, 3, 20, 100}) {
      const Eigen::VectorXd z = mem.knn_descriptor(query, k);
      const Eigen::VectorXd ref = knn_reference(mem.entries(), query, k);
      CHECK(testutil::max_rel_error(z, ref) <= 1e-12);
      CHECK(z.minCoeff() >= 0.0);
      CHECK(z.maxCoeff() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("select_k Last returns the k most recent insertions oldest first") {
  SharedMemory mem(3);
  mem.insert({0, 0}, 0.0);
  mem.insert({0, 1}, 1.0);
  mem.insert({1, 0}, 1.0);
  mem.insert({1, 1}, 2.0);  // evicts {0,0}
  const auto k2 = select_k(mem, {}, {}, SelectKStrategy::Last, 2);
  REQUIRE(k2.size() == 2);
  CHECK(k2[0] == Bits{1, 0});
  CHECK(k2[1] == Bits{1, 1});
  // k larger than the store returns everything.
  const auto k9 = select_k(mem, {}, {}, SelectKStrategy::Last, 9);
  REQUIRE(k9.size() == 3);
  CHECK(k9[0] == Bits{0, 1});
}

TEST_CASE("select_k best strategies forward the per-individual bests") {
  SharedMemory mem;
  const std::vector<Bits> global = {{1, 1}, {0, 0}};
  const std::vector<Bits> current = {{0, 1}};
  CHECK(select_k(mem, global, current, SelectKStrategy::BestGlobal, 5) ==
        global);
  CHECK(select_k(mem, global, current, SelectKStrategy::BestCurrent, 5) ==
        current);
}

TEST_CASE("select_k parsing round-trips") {
  CHECK(parse_select_k("last") == SelectKStrategy::Last);
  CHECK(parse_select_k("best_global") == SelectKStrategy::BestGlobal);
  CHECK(parse_select_k("best_current") == SelectKStrategy::BestCurrent);
  CHECK_THROWS_AS(parse_select_k("nope"), std::invalid_argument);
  CHECK(std::string(select_k_name(SelectKStrategy::Last)) == "last");
}

TEST_CASE("dump_jsonl emits one parseable object per entry") {
  SharedMemory mem;
  mem.insert({1, 0, 1}, 2.0);
  mem.insert({0, 0, 0}, 0.5);
  std::ostringstream out;
  mem.dump_jsonl(out);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("bits"));
    CHECK(j.contains("objective"));
    CHECK(j.contains("insertion_index"));
    if (rows == 0) {
      CHECK(j["bits"] == "101");
      CHECK(j["objective"] == 2.0);
      CHECK(j["insertion_index"] == 0);
    }
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("step-snapshot writes match a reference fifo") {
  // Simulates the population-step contract: all individuals read one
  // snapshot, then their writes land in individual order at the barrier.
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int pop = 4, steps = 30, n = 6;
    SharedMemory mem(17);
    std::vector<std::pair<Bits, double>> reference;  // capacity-17 fifo

    for (int t = 0; t < steps; ++t) {
      std::vector<std::pair<Bits, double>> writes;
      for (int i = 0; i < pop; ++i) {
        const Bits b = random_bits(n, rng);
        writes.push_back({b, static_cast<double>(t)});
      }
      for (const auto& [b, obj] : writes) {
        mem.insert(b, obj);
        reference.push_back({b, obj});
        if (reference.size() > 17) reference.erase(reference.begin());
      }

      REQUIRE(mem.size() == reference.size());
      auto it = mem.entries().begin();
      for (const auto& [b, obj] : reference) {
        CHECK(it->bits == b);
        CHECK(it->objective == obj);
        ++it;
      }
      for (const auto& [b, obj] : reference) CHECK(mem.contains(b));
    }
  }
}
