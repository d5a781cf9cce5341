#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pbnco/graph.hpp"
#include "pbnco/rng.hpp"

namespace pbnco {

enum class Problem { MaxCut, Mis };

const char* problem_name(Problem p);
Problem parse_problem(const std::string& name);

using Bits = std::vector<std::uint8_t>;

/// Candidate solution with its objective cached. MIS solutions are kept
/// feasible by construction everywhere in the library.
struct Solution {
  Bits bits;
  double objective = 0.0;
  Problem problem = Problem::MaxCut;

  bool operator==(const Solution&) const = default;
};

enum class ActionKind { Flip, Activate, Deactivate };

struct Action {
  ActionKind kind;
  int node;

  bool operator==(const Action&) const = default;
};

double mc_objective(const GraphInstance& g, const Bits& bits);
double mis_objective(const Bits& bits);
bool mis_is_feasible(const GraphInstance& g, const Bits& bits);
double objective_value(const GraphInstance& g, Problem problem,
                       const Bits& bits);

/// Validates the bits (length, MIS feasibility) and caches the objective.
Solution make_solution(const GraphInstance& g, Problem problem, Bits bits);

/// Affine objective normalization f~ = (f - center) / width, with the
/// constants chosen per problem so that typical anytime values land in a
/// comparable range across instances.
struct RewardScale {
  Problem problem = Problem::MaxCut;
  double baseline = 0.0;  // MC: |E|/2
  double scale = 1.0;     // MC: sqrt(|E| |V| ln2 / 2), 1 on edgeless graphs
  double lower_L = 0.0;   // MIS: Caro-Wei bound
  double upper_U = 1.0;   // MIS: |V| - greedy maximal matching size

  double normalize(double f) const {
    if (problem == Problem::MaxCut) return (f - baseline) / scale;
    const double denom = upper_U > lower_L ? upper_U - lower_L : 1.0;
    return (f - lower_L) / denom;
  }
};

RewardScale mc_reward_scale(const GraphInstance& g, bool natural_log = true);
RewardScale mis_reward_scale(const GraphInstance& g);
RewardScale reward_scale(const GraphInstance& g, Problem problem,
                         bool natural_log = true);

/// Size of a greedy maximal matching, scanning edges in canonical order.
int greedy_matching_size(const GraphInstance& g);

double hamming_normalized(const Bits& a, const Bits& b);

/// MC: fair coin per node. MIS: random permutation greedy, feasible and
/// maximal by construction.
Solution random_solution(const GraphInstance& g, const Adjacency& adj,
                         Problem problem, Rng& rng);

std::vector<Action> legal_actions(const Adjacency& adj, const Solution& s);
bool is_legal_action(const Adjacency& adj, const Solution& s, Action a);

/// Applies a legal action with an incremental objective update.
/// Throws std::logic_error on illegal actions.
Solution apply_action(const Adjacency& adj, const Solution& s, Action a);

/// Node features for the improvement policy: [s_u, z_u] where z is the
/// memory descriptor (all zeros when the memory is empty).
Eigen::MatrixXd build_cni_features(const GraphInstance& g, const Bits& bits,
                                   const Eigen::VectorXd& z);

/// Node features for the constructive policy: K_max reference-solution
/// channels zero-padded past |K|, then a broadcast omega channel, then for
/// MC an indicator channel for the symmetry anchor node 0.
Eigen::MatrixXd build_cnc_features(const GraphInstance& g,
                                   const std::vector<Bits>& refs, double omega,
                                   int k_max, bool mc_anchor);

/// Constant presence channel per edge, aligned with g.edges.
Eigen::MatrixXd edge_presence_features(const GraphInstance& g);

}  // namespace pbnco
