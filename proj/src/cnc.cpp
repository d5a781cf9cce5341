#include "pbnco/cnc.hpp"

#include <algorithm>
#include <stdexcept>

namespace pbnco {

double cnc_reward(const Solution& s, const std::vector<Bits>& refs,
                  double omega, const RewardScale& scale) {
  if (!(omega >= 0.0 && omega <= 1.0))
    throw std::invalid_argument("cnc_reward: omega must be in [0,1]");
  const double f = scale.normalize(s.objective);
  double diversity = 0.0;
  if (!refs.empty()) {
    for (const auto& m : refs) diversity += hamming_normalized(s.bits, m);
    diversity /= static_cast<double>(refs.size());
  }
  return (1.0 - omega) * f + omega * diversity;
}

double sample_omega(Rng& rng, double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0))
    throw std::invalid_argument("sample_omega: alpha, beta must be > 0");
  return rng.beta(alpha, beta);
}

double omega_schedule(double t, double t_max, double omega_start, double phi) {
  if (t_max <= 0.0) throw std::invalid_argument("omega_schedule: T_max <= 0");
  const double base = std::max(0.0, 1.0 - t / t_max);
  return std::clamp(omega_start * std::pow(base, phi), 0.0, 1.0);
}

}  // namespace pbnco
