#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbnco/problems.hpp"

namespace pbnco {

inline constexpr std::size_t kDefaultMemoryCapacity = 10000;

struct MemoryEntry {
  Bits bits;
  double objective = 0.0;
  std::uint64_t insertion_index = 0;
};

/// Bounded FIFO store of visited solutions with exact multiset
/// membership. Concurrency follows a step-snapshot contract: during a
/// population step all individuals read the same snapshot; their writes
/// are buffered by the caller and applied in individual order at the
/// step barrier.
class SharedMemory {
 public:
  explicit SharedMemory(std::size_t capacity = kDefaultMemoryCapacity);

  void insert(const Bits& bits, double objective);
  void insert(const Solution& s) { insert(s.bits, s.objective); }

  /// True iff at least one stored entry has identical bits.
  bool contains(const Bits& bits) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t next_insertion_index() const { return next_index_; }
  const std::deque<MemoryEntry>& entries() const { return entries_; }

  /// Distance-weighted average of the k nearest stored solutions:
  /// distances d_j (normalized Hamming, ties broken toward older
  /// entries) are min-max normalized with epsilon, weights w = 1 - d~,
  /// alpha = w / sum(w), z = sum(alpha_j * bits_j). Zero vector when the
  /// memory is empty.
  Eigen::VectorXd knn_descriptor(const Bits& bits, int k,
                                 double epsilon = 1e-9) const;

  /// One JSON object per entry: {"bits": "0101...", "objective": x,
  /// "insertion_index": n}.
  void dump_jsonl(std::ostream& out) const;

 private:
  std::size_t capacity_;
  std::deque<MemoryEntry> entries_;

  struct BitsHash {
    std::size_t operator()(const Bits& b) const {
      std::uint64_t h = 14695981039346656037ULL;
      for (auto x : b) {
        h ^= x;
        h *= 1099511628211ULL;
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<Bits, int, BitsHash> counts_;
  std::uint64_t next_index_ = 0;
};

enum class SelectKStrategy { Last, BestGlobal, BestCurrent };

SelectKStrategy parse_select_k(const std::string& name);
const char* select_k_name(SelectKStrategy s);

/// Conditioning set for a restart. Last: the k most recent insertions,
/// oldest first. BestGlobal / BestCurrent: one solution per individual
/// (k ignored), taken from the caller-maintained per-individual bests.
std::vector<Bits> select_k(const SharedMemory& mem,
                           const std::vector<Bits>& best_global,
                           const std::vector<Bits>& best_current,
                           SelectKStrategy strategy, int k);

}  // namespace pbnco
