#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace pbnco::ad {

class Tape;

/// Handle into a tape. Cheap to copy; valid for the lifetime of its tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Eigen::MatrixXd& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

/// Reverse-mode tape over dense double matrices. One tape per trajectory;
/// gradients accumulate until zero_grad() or clear().
class Tape {
 public:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    std::function<void(Tape&)> backward;  // empty for leaves
  };

  Var leaf(Eigen::MatrixXd value);

  Var make(Eigen::MatrixXd value, std::function<void(Tape&)> backward);

  const Eigen::MatrixXd& value(Var v) const { return nodes_[v.id].value; }
  const Eigen::MatrixXd& grad(Var v) const { return nodes_[v.id].grad; }

  // Id-based access for backward closures.
  const Eigen::MatrixXd& val_of(int id) const { return nodes_[id].value; }
  Eigen::MatrixXd& grad_of(int id) { return nodes_[id].grad; }

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse creation
  /// order. loss must be 1x1. Gradients accumulate across calls.
  void backward(Var loss);

  void zero_grad();
  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;

  friend struct Var;
};

inline const Eigen::MatrixXd& Var::value() const {
  return tape->value(*this);
}

// Forward ops. Each op validates shapes (std::invalid_argument naming the
// op) and records its backward closure on the tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cmul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var add_rowvec(Var a, Var r);  // r is 1 x cols(a), broadcast over rows
Var transpose(Var a);
Var row_softmax(Var a);
/// Softmax per row restricted to entries where mask != 0; masked entries
/// are exactly 0. Throws if any row has an all-zero mask.
Var masked_row_softmax(Var a, const Eigen::MatrixXd& mask);
/// Plain-value masked softmax, shared by the tape op and fast inference.
Eigen::MatrixXd masked_softmax_value(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& mask);
/// Per-row entropy of the masked softmax of a; returns rows(a) x 1.
Var masked_entropy(Var a, const Eigen::MatrixXd& mask);
Var gelu(Var a);  // tanh approximation
/// Per-row layer normalization with affine parameters (1 x cols each).
Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
Var mean(Var a);  // 1x1
Var sum(Var a);   // 1x1
Var select_rows(Var a, std::vector<int> rows);
Var entry(Var a, int i, int j);  // 1x1
Var concat_cols(Var a, Var b);
Var log(Var a);
Var sigmoid(Var a);
Var log_sigmoid(Var a);
/// Scatters a per-edge column (|E| x 1) into an n x n matrix at both (u,v)
/// and (v,u); all other entries 0. Used for attention edge biases.
Var scatter_edge_bias(Var per_edge, const std::vector<std::pair<int, int>>& edges,
                      int n);

// Optimizer steps, ascent convention: params move along +gradient.

void sgd_step(const std::vector<Eigen::MatrixXd*>& params,
              const std::vector<Eigen::MatrixXd>& grads, double lr);

struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;
};

void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

}  // namespace pbnco::ad
