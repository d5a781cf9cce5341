#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbnco/graph.hpp"
#include "pbnco/nnops.hpp"
#include "pbnco/problems.hpp"
#include "pbnco/rng.hpp"

namespace pbnco {

struct GnnConfig {
  int layers = 3;
  int dim = 64;
  int heads = 8;
  int ff_dim = 256;
  int node_in = 2;
  int edge_in = 1;
  bool has_anchor = false;
  bool dense_attention = false;

  int head_dim() const { return dim / heads; }

  bool operator==(const GnnConfig&) const = default;
};

/// Encoder-decoder weights. Matrices live at stable addresses for the
/// lifetime of a training run; GradContext caches tape leaves by address.
struct PolicyParameters {
  GnnConfig config;

  Eigen::MatrixXd node_proj;    // node_in x d
  Eigen::MatrixXd node_proj_b;  // 1 x d

  struct Layer {
    Eigen::MatrixXd edge_bias;              // edge_in x heads
    std::vector<Eigen::MatrixXd> wq, wk, wv;  // per head, d x d/h
    Eigen::MatrixXd wo;                     // d x d
    Eigen::MatrixXd ln1_g, ln1_b;           // 1 x d
    Eigen::MatrixXd ff1, ff1_b;             // d x d_ff, 1 x d_ff
    Eigen::MatrixXd ff2, ff2_b;             // d_ff x d, 1 x d
    Eigen::MatrixXd ln2_g, ln2_b;           // 1 x d
  };
  std::vector<Layer> layers;

  Eigen::MatrixXd dec1, dec1_b;  // d x d, 1 x d
  Eigen::MatrixXd dec2, dec2_b;  // d x 1, 1 x 1

  Eigen::MatrixXd anchor;  // 1 x d, present iff config.has_anchor

  /// Visits every parameter matrix in a fixed order. The checkpoint
  /// format, gradient flattening, and initialization all rely on this
  /// order staying stable.
  template <class F>
  void visit(F&& f) {
    f(node_proj);
    f(node_proj_b);
    for (auto& l : layers) {
      f(l.edge_bias);
      for (int h = 0; h < config.heads; ++h) {
        f(l.wq[h]);
        f(l.wk[h]);
        f(l.wv[h]);
      }
      f(l.wo);
      f(l.ln1_g);
      f(l.ln1_b);
      f(l.ff1);
      f(l.ff1_b);
      f(l.ff2);
      f(l.ff2_b);
      f(l.ln2_g);
      f(l.ln2_b);
    }
    f(dec1);
    f(dec1_b);
    f(dec2);
    f(dec2_b);
    if (config.has_anchor) f(anchor);
  }

  template <class F>
  void visit(F&& f) const {
    const_cast<PolicyParameters*>(this)->visit(
        [&](Eigen::MatrixXd& m) { f(const_cast<const Eigen::MatrixXd&>(m)); });
  }
};

/// Fresh parameters: weights uniform in +-1/sqrt(fan_in), biases zero,
/// layer-norm gains one. Deterministic in the seed.
PolicyParameters make_policy(const GnnConfig& config, std::uint64_t seed);

/// Attention mask: self plus graph neighbors, or all-ones when dense.
Eigen::MatrixXd attention_mask(const GraphInstance& g, bool dense);

/// Inference context: Value is a plain matrix, no tape involved.
struct EvalContext {
  using Value = Eigen::MatrixXd;
  Value leaf(const Eigen::MatrixXd& m) const { return m; }
  Value param(const Eigen::MatrixXd& m) const { return m; }
};

/// Training context: Value is a tape var; parameter leaves are created
/// once per tape and reused, so gradients accumulate in one place.
struct GradContext {
  using Value = ad::Var;
  ad::Tape& tape;
  std::unordered_map<const Eigen::MatrixXd*, ad::Var> param_vars;

  explicit GradContext(ad::Tape& t) : tape(t) {}

  Value leaf(const Eigen::MatrixXd& m) { return tape.leaf(m); }
  Value param(const Eigen::MatrixXd& m) {
    auto it = param_vars.find(&m);
    if (it != param_vars.end()) return it->second;
    const auto v = tape.leaf(m);
    param_vars.emplace(&m, v);
    return v;
  }

  /// Gradient of the loss w.r.t. a parameter matrix; zero if the forward
  /// pass never touched it.
  Eigen::MatrixXd grad(const Eigen::MatrixXd& m) const {
    auto it = param_vars.find(&m);
    if (it == param_vars.end())
      return Eigen::MatrixXd::Zero(m.rows(), m.cols());
    return tape.grad(it->second);
  }
};

/// L rounds of edge-masked multi-head attention with residual + layer
/// norm and a GeLU FFN block. Returns |V| x d node embeddings.
/// node_features must have config.node_in columns; edge_features is
/// |E| x edge_in aligned with g.edges and enters as additive per-head
/// attention biases at edge positions.
template <class Ctx>
typename Ctx::Value encode(Ctx& ctx, const PolicyParameters& pp,
                           const GraphInstance& g,
                           const Eigen::MatrixXd& node_features,
                           const Eigen::MatrixXd& edge_features) {
  using nn::add;
  using nn::add_rowvec;
  using nn::gelu;
  using nn::layer_norm;
  using nn::masked_row_softmax;
  using nn::matmul;
  using nn::scale;
  using nn::scatter_edge_bias;
  using nn::transpose;

  const GnnConfig& cfg = pp.config;
  if (node_features.cols() != cfg.node_in)
    throw std::invalid_argument("encode: node feature channels " +
                                std::to_string(node_features.cols()) +
                                ", expected " + std::to_string(cfg.node_in));
  if (edge_features.rows() != g.edge_count() ||
      edge_features.cols() != cfg.edge_in)
    throw std::invalid_argument("encode: edge feature shape mismatch");

  const int n = g.node_count;
  const Eigen::MatrixXd mask = attention_mask(g, cfg.dense_attention);
  const double inv_sqrt_dh = 1.0 / std::sqrt(double(cfg.head_dim()));

  auto x = add_rowvec(matmul(ctx.leaf(node_features), ctx.param(pp.node_proj)),
                      ctx.param(pp.node_proj_b));
  if (cfg.has_anchor) {
    // Anchor embedding lands on node 0 only: one-hot column times the
    // 1 x d embedding row.
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, 1);
    onehot(0, 0) = 1.0;
    x = add(x, matmul(ctx.leaf(onehot), ctx.param(pp.anchor)));
  }

  const bool has_edges = g.edge_count() > 0;
  for (const auto& layer : pp.layers) {
    typename Ctx::Value edge_bias_cols;
    if (has_edges)
      edge_bias_cols =
          matmul(ctx.leaf(edge_features), ctx.param(layer.edge_bias));

    typename Ctx::Value heads_out;
    for (int h = 0; h < cfg.heads; ++h) {
      auto q = matmul(x, ctx.param(layer.wq[h]));
      auto k = matmul(x, ctx.param(layer.wk[h]));
      auto v = matmul(x, ctx.param(layer.wv[h]));
      auto scores = scale(matmul(q, transpose(k)), inv_sqrt_dh);
      if (has_edges) {
        Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(cfg.heads, 1);
        pick(h, 0) = 1.0;
        auto bias = scatter_edge_bias(matmul(edge_bias_cols, ctx.leaf(pick)),
                                      g.edges, n);
        scores = add(scores, bias);
      }
      auto attn = masked_row_softmax(scores, mask);
      auto head = matmul(attn, v);
      heads_out = h == 0 ? head : nn::concat_cols(heads_out, head);
    }
    x = layer_norm(add(x, matmul(heads_out, ctx.param(layer.wo))),
                   ctx.param(layer.ln1_g), ctx.param(layer.ln1_b));
    auto ff = add_rowvec(
        matmul(gelu(add_rowvec(matmul(x, ctx.param(layer.ff1)),
                               ctx.param(layer.ff1_b))),
               ctx.param(layer.ff2)),
        ctx.param(layer.ff2_b));
    x = layer_norm(add(x, ff), ctx.param(layer.ln2_g), ctx.param(layer.ln2_b));
  }
  return x;
}

/// Shared per-node MLP head: d -> d (GeLU) -> 1. Returns |V| x 1 logits.
template <class Ctx>
typename Ctx::Value decode_node_logits(Ctx& ctx, const PolicyParameters& pp,
                                       typename Ctx::Value embeddings) {
  auto hidden = nn::gelu(nn::add_rowvec(nn::matmul(embeddings, ctx.param(pp.dec1)),
                                        ctx.param(pp.dec1_b)));
  return nn::add_rowvec(nn::matmul(hidden, ctx.param(pp.dec2)),
                        ctx.param(pp.dec2_b));
}

/// Softmax over legal entries only; illegal entries get exactly 0.
/// Throws if no entry is legal.
Eigen::VectorXd action_distribution(const Eigen::VectorXd& logits,
                                    const std::vector<char>& legal);

/// Inverse-CDF sample from a distribution; always returns an index with
/// positive probability.
int sample_action(const Eigen::VectorXd& dist, Rng& rng);

/// Argmax with lowest-index tie-break.
int greedy_action(const Eigen::VectorXd& dist);

enum class PolicyKind { Improvement, Constructive };

struct PolicyMeta {
  PolicyKind kind = PolicyKind::Improvement;
  Problem problem = Problem::MaxCut;
  int k_max = 0;  // constructive only

  bool operator==(const PolicyMeta&) const = default;
};

struct Checkpoint {
  PolicyMeta meta;
  PolicyParameters params;
};

/// Binary checkpoint: magic, meta + hyperparameters, every matrix in
/// visit order as raw doubles, then a 64-bit FNV-1a digest of the
/// preceding bytes. Round-trips are bit-exact.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(const std::string& bytes);

}  // namespace pbnco
