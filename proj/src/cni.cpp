#include "pbnco/cni.hpp"

#include <algorithm>

namespace pbnco {

CniReward cni_reward(double prev_best, double new_objective, bool revisited,
                     double w_rep, const RewardScale& scale, bool normalized) {
  CniReward r;
  const double prev = normalized ? scale.normalize(prev_best) : prev_best;
  const double next = normalized ? scale.normalize(new_objective) : new_objective;
  r.r_obj = std::max(next - prev, 0.0);
  r.r_rep = revisited ? -1.0 : 0.0;
  r.total = r.r_obj + w_rep * r.r_rep;
  r.new_best = std::max(prev_best, new_objective);
  return r;
}

}  // namespace pbnco
