#include "pbnco/trace.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace pbnco {

std::vector<double> diversity_trace(const std::vector<Bits>& history) {
  if (history.empty())
    throw std::invalid_argument("diversity_trace: empty history");
  DiversityTracker tracker(static_cast<int>(history.front().size()));
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& bits : history) {
    tracker.append(bits);
    out.push_back(tracker.value());
  }
  return out;
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string trace_to_csv(const AnytimeTrace& trace,
                         std::optional<double> reference) {
  std::string out =
      "step,elapsed_seconds,best_objective,best_ratio,"
      "population_mean_objective,diversity\n";
  for (const auto& p : trace.points) {
    out += std::to_string(p.step);
    out += ',';
    out += format_double(p.elapsed_seconds);
    out += ',';
    out += format_double(p.best_objective);
    out += ',';
    if (reference && *reference != 0.0)
      out += format_double(p.best_objective / *reference);
    out += ',';
    out += format_double(p.population_mean_objective);
    out += ',';
    out += format_double(p.diversity);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path, const AnytimeTrace& trace,
                     std::optional<double> reference) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << trace_to_csv(trace, reference);
}

}  // namespace pbnco
