#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pbnco/rng.hpp"

namespace pbnco {

enum class Family { Er, Rb, Custom };

const char* family_name(Family f);

/// Undirected simple graph. Edges are kept canonical: u < v within a pair
/// and pairs sorted lexicographically. `weights` is either empty (all edges
/// weigh 1) or aligned with `edges`.
struct GraphInstance {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  Family family = Family::Custom;
  std::uint64_t seed = 0;

  int edge_count() const { return static_cast<int>(edges.size()); }
  double weight(std::size_t e) const {
    return weights.empty() ? 1.0 : weights[e];
  }

  /// Sorts edges into canonical order (weights follow) and checks the
  /// simple-graph invariants. Throws std::invalid_argument on violation.
  void canonicalize();

  bool operator==(const GraphInstance&) const = default;
};

/// Neighbor lists built once per instance; index-aligned weight lists.
struct Adjacency {
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<double>> neighbor_weights;

  explicit Adjacency(const GraphInstance& g);

  int degree(int u) const { return static_cast<int>(neighbors[u].size()); }
};

GraphInstance generate_er(int n, double p, std::uint64_t seed);

/// RB-style instance: `groups` cliques of `group_size` nodes each, plus
/// round(a * groups * ln(groups)) rounds that each add round(p * d^2)
/// distinct cross edges between a random pair of cliques.
GraphInstance generate_rb(int groups, int group_size, double tightness,
                          double constraint_factor, std::uint64_t seed);

struct ParseError : std::runtime_error {
  std::size_t byte_offset;
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) +
                           ")"),
        byte_offset(offset) {}
};

/// Line-oriented text form:
///   c seed <seed>
///   p <er|rb|custom> <node_count> <edge_count>
///   e <u> <v> [<w>]        (0-indexed, one per edge)
std::string serialize_instance(const GraphInstance& g);
GraphInstance parse_instance(const std::string& text);

GraphInstance load_instance(const std::string& path);
void save_instance(const GraphInstance& g, const std::string& path);

}  // namespace pbnco
