#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbnco/problems.hpp"

namespace pbnco {

/// Mean pairwise normalized Hamming distance over an append-only history,
/// maintained incrementally in O(|V|) per append. The pair-distance sum
/// is kept as an exact integer count of differing positions.
class DiversityTracker {
 public:
  explicit DiversityTracker(int n) : ones_(n, 0) {}

  void append(const Bits& bits) {
    std::uint64_t diff = 0;
    for (std::size_t u = 0; u < bits.size(); ++u)
      diff += bits[u] ? count_ - ones_[u] : ones_[u];
    diff_sum_ += diff;
    for (std::size_t u = 0; u < bits.size(); ++u) ones_[u] += bits[u];
    ++count_;
  }

  std::uint64_t count() const { return count_; }

  /// 0 with fewer than two solutions.
  double value() const {
    if (count_ < 2 || ones_.empty()) return 0.0;
    const double pairs = 0.5 * static_cast<double>(count_) *
                         static_cast<double>(count_ - 1);
    return static_cast<double>(diff_sum_) /
           (pairs * static_cast<double>(ones_.size()));
  }

 private:
  std::vector<std::uint64_t> ones_;
  std::uint64_t count_ = 0;
  std::uint64_t diff_sum_ = 0;
};

/// Diversity after each prefix of the history.
std::vector<double> diversity_trace(const std::vector<Bits>& history);

struct TracePoint {
  std::int64_t step = 0;
  double elapsed_seconds = 0.0;
  double best_objective = 0.0;
  double population_mean_objective = 0.0;
  double diversity = 0.0;
};

struct AnytimeTrace {
  std::vector<TracePoint> points;
};

/// CSV with header step,elapsed_seconds,best_objective,best_ratio,
/// population_mean_objective,diversity. best_ratio is blank unless a
/// reference value is supplied. Numeric formatting is shortest
/// round-trip, so equal traces serialize byte-identically.
std::string trace_to_csv(const AnytimeTrace& trace,
                         std::optional<double> reference = std::nullopt);

void write_trace_csv(const std::string& path, const AnytimeTrace& trace,
                     std::optional<double> reference = std::nullopt);

/// Shortest round-trip decimal form of a double (to_chars), used
/// everywhere deterministic text output is required.
std::string format_double(double x);

}  // namespace pbnco
