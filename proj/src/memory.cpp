#include "pbnco/memory.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace pbnco {

SharedMemory::SharedMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0)
    throw std::invalid_argument("memory capacity must be >= 1");
}

void SharedMemory::insert(const Bits& bits, double objective) {
  if (entries_.size() == capacity_) {
    const auto& victim = entries_.front();
    auto it = counts_.find(victim.bits);
    if (--it->second == 0) counts_.erase(it);
    entries_.pop_front();
  }
  entries_.push_back({bits, objective, next_index_++});
  ++counts_[bits];
}

bool SharedMemory::contains(const Bits& bits) const {
  return counts_.contains(bits);
}

Eigen::VectorXd SharedMemory::knn_descriptor(const Bits& bits, int k,
                                             double epsilon) const {
  if (k < 1) throw std::invalid_argument("knn_descriptor: k must be >= 1");
  const auto n = static_cast<Eigen::Index>(bits.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (entries_.empty()) return z;

  struct Cand {
    double dist;
    std::uint64_t insertion;
    const MemoryEntry* entry;
  };
  std::vector<Cand> cands;
  cands.reserve(entries_.size());
  for (const auto& e : entries_)
    cands.push_back({hamming_normalized(bits, e.bits), e.insertion_index, &e});

  const std::size_t kk = std::min<std::size_t>(k, cands.size());
  const auto by_dist_then_age = [](const Cand& a, const Cand& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.insertion < b.insertion;
  };
  std::partial_sort(cands.begin(), cands.begin() + kk, cands.end(),
                    by_dist_then_age);

  double d_min = cands[0].dist, d_max = cands[0].dist;
  for (std::size_t j = 1; j < kk; ++j) {
    d_min = std::min(d_min, cands[j].dist);
    d_max = std::max(d_max, cands[j].dist);
  }
  double w_sum = 0.0;
  std::vector<double> w(kk);
  for (std::size_t j = 0; j < kk; ++j) {
    const double dt = (cands[j].dist - d_min) / (d_max - d_min + epsilon);
    w[j] = 1.0 - dt;
    w_sum += w[j];
  }
  for (std::size_t j = 0; j < kk; ++j) {
    const double alpha = w[j] / w_sum;
    const Bits& b = cands[j].entry->bits;
    for (Eigen::Index u = 0; u < n; ++u)
      if (b[static_cast<std::size_t>(u)]) z(u) += alpha;
  }
  return z;
}

void SharedMemory::dump_jsonl(std::ostream& out) const {
  for (const auto& e : entries_) {
    out << "{\"bits\":\"";
    for (auto b : e.bits) out << (b ? '1' : '0');
    out << "\",\"objective\":" << e.objective
        << ",\"insertion_index\":" << e.insertion_index << "}\n";
  }
}

SelectKStrategy parse_select_k(const std::string& name) {
  if (name == "last") return SelectKStrategy::Last;
  if (name == "best_global") return SelectKStrategy::BestGlobal;
  if (name == "best_current") return SelectKStrategy::BestCurrent;
  throw std::invalid_argument("unknown select_k strategy: " + name);
}

const char* select_k_name(SelectKStrategy s) {
  switch (s) {
    case SelectKStrategy::Last:
      return "last";
    case SelectKStrategy::BestGlobal:
      return "best_global";
    case SelectKStrategy::BestCurrent:
      return "best_current";
  }
  return "last";
}

std::vector<Bits> select_k(const SharedMemory& mem,
                           const std::vector<Bits>& best_global,
                           const std::vector<Bits>& best_current,
                           SelectKStrategy strategy, int k) {
  std::vector<Bits> out;
  switch (strategy) {
    case SelectKStrategy::Last: {
      const auto& entries = mem.entries();
      const std::size_t take =
          std::min<std::size_t>(k < 0 ? 0 : static_cast<std::size_t>(k),
                                entries.size());
      out.reserve(take);
      for (std::size_t i = entries.size() - take; i < entries.size(); ++i)
        out.push_back(entries[i].bits);
      break;
    }
    case SelectKStrategy::BestGlobal:
      out = best_global;
      break;
    case SelectKStrategy::BestCurrent:
      out = best_current;
      break;
  }
  return out;
}

}  // namespace pbnco
