#include "pbnco/autodiff.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pbnco::ad {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

// Masked softmax per row; rows with an all-zero mask are rejected.
Eigen::MatrixXd masked_softmax_value(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& mask) {
  check(a.rows() == mask.rows() && a.cols() == mask.cols(),
        "masked_row_softmax: mask shape " + shape(mask) + " vs " + shape(a));
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (mask(i, j) != 0.0) mx = std::max(mx, a(i, j));
    check(std::isfinite(mx), "masked_row_softmax: row " + std::to_string(i) +
                                 " has no legal entries");
    double z = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        p(i, j) = std::exp(a(i, j) - mx);
        z += p(i, j);
      }
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (mask(i, j) != 0.0) p(i, j) /= z;
  }
  return p;
}

Var Tape::leaf(Eigen::MatrixXd value) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::make(Eigen::MatrixXd value, std::function<void(Tape&)> backward) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
  check(loss.tape == this, "backward: var from another tape");
  check(nodes_[loss.id].value.size() == 1, "backward: loss must be scalar");
  nodes_[loss.id].grad(0, 0) += 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].backward) nodes_[i].backward(*this);
}

void Tape::zero_grad() {
  for (auto& n : nodes_) n.grad.setZero();
}

Var matmul(Var a, Var b) {
  check(a.tape == b.tape, "matmul: vars from different tapes");
  check(a.cols() == b.rows(),
        "matmul: " + shape(a.value()) + " * " + shape(b.value()));
  Tape& t = *a.tape;
  const int ia = a.id, ib = b.id, out = static_cast<int>(t.size());
  return t.make(a.value() * b.value(), [ia, ib, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    t.grad_of(ia) += g * t.val_of(ib).transpose();
    t.grad_of(ib) += t.val_of(ia).transpose() * g;
  });
}

Var add(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(),
        "add: " + shape(a.value()) + " vs " + shape(b.value()));
  Tape& t = *a.tape;
  const int ia = a.id, ib = b.id, out = static_cast<int>(t.size());
  return t.make(a.value() + b.value(), [ia, ib, out](Tape& t) {
    t.grad_of(ia) += t.grad_of(out);
    t.grad_of(ib) += t.grad_of(out);
  });
}

Var sub(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(),
        "sub: " + shape(a.value()) + " vs " + shape(b.value()));
  Tape& t = *a.tape;
  const int ia = a.id, ib = b.id, out = static_cast<int>(t.size());
  return t.make(a.value() - b.value(), [ia, ib, out](Tape& t) {
    t.grad_of(ia) += t.grad_of(out);
    t.grad_of(ib) -= t.grad_of(out);
  });
}

Var cmul(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(),
        "cmul: " + shape(a.value()) + " vs " + shape(b.value()));
  Tape& t = *a.tape;
  const int ia = a.id, ib = b.id, out = static_cast<int>(t.size());
  return t.make(a.value().cwiseProduct(b.value()), [ia, ib, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    t.grad_of(ia) += g.cwiseProduct(t.val_of(ib));
    t.grad_of(ib) += g.cwiseProduct(t.val_of(ia));
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(a.value() * c, [ia, out, c](Tape& t) {
    t.grad_of(ia) += c * t.grad_of(out);
  });
}

Var add_rowvec(Var a, Var r) {
  check(r.rows() == 1 && r.cols() == a.cols(),
        "add_rowvec: " + shape(a.value()) + " + " + shape(r.value()));
  Tape& t = *a.tape;
  const int ia = a.id, ir = r.id, out = static_cast<int>(t.size());
  Eigen::MatrixXd v = a.value();
  v.rowwise() += r.value().row(0);
  return t.make(std::move(v), [ia, ir, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    t.grad_of(ia) += g;
    t.grad_of(ir) += g.colwise().sum();
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(a.value().transpose(), [ia, out](Tape& t) {
    t.grad_of(ia) += t.grad_of(out).transpose();
  });
}

Var row_softmax(Var a) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  Eigen::MatrixXd p(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double mx = a.value().row(i).maxCoeff();
    p.row(i) = (a.value().row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return t.make(std::move(p), [ia, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    const Eigen::MatrixXd& p = t.val_of(out);
    Eigen::MatrixXd& da = t.grad_of(ia);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double dot = g.row(i).dot(p.row(i));
      da.row(i) += (p.row(i).array() * (g.row(i).array() - dot)).matrix();
    }
  });
}

Var masked_row_softmax(Var a, const Eigen::MatrixXd& mask) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(masked_softmax_value(a.value(), mask), [ia, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    const Eigen::MatrixXd& p = t.val_of(out);
    Eigen::MatrixXd& da = t.grad_of(ia);
    // Masked entries have p = 0, so their gradient contribution vanishes.
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double dot = g.row(i).dot(p.row(i));
      da.row(i) += (p.row(i).array() * (g.row(i).array() - dot)).matrix();
    }
  });
}

Var masked_entropy(Var a, const Eigen::MatrixXd& mask) {
  Tape& t = *a.tape;
  const Eigen::MatrixXd p = masked_softmax_value(a.value(), mask);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(a.rows(), 1);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) h(i, 0) -= p(i, j) * std::log(p(i, j));
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(std::move(h), [ia, out, p](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    const Eigen::MatrixXd& h = t.val_of(out);
    Eigen::MatrixXd& da = t.grad_of(ia);
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        if (p(i, j) > 0.0)
          da(i, j) -= g(i, 0) * p(i, j) * (std::log(p(i, j)) + h(i, 0));
  });
}

Var gelu(Var a) {
  Tape& t = *a.tape;
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kK = 0.044715;
  const Eigen::MatrixXd& x = a.value();
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    y(i) = 0.5 * v * (1.0 + std::tanh(kC * (v + kK * v * v * v)));
  }
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(std::move(y), [ia, out](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    const Eigen::MatrixXd& x = t.val_of(ia);
    Eigen::MatrixXd& da = t.grad_of(ia);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x(i);
      const double u = kC * (v + kK * v * v * v);
      const double th = std::tanh(u);
      const double du = kC * (1.0 + 3.0 * kK * v * v);
      da(i) += g(i) * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du);
    }
  });
}

Var layer_norm(Var a, Var gamma, Var beta, double eps) {
  check(gamma.rows() == 1 && gamma.cols() == a.cols() && beta.rows() == 1 &&
            beta.cols() == a.cols(),
        "layer_norm: affine shapes " + shape(gamma.value()) + ", " +
            shape(beta.value()) + " vs input " + shape(a.value()));
  Tape& t = *a.tape;
  const Eigen::MatrixXd& x = a.value();
  const Eigen::Index d = x.cols();
  Eigen::VectorXd inv(x.rows());
  Eigen::MatrixXd xhat(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().sum() / d;
    inv(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mu) * inv(i);
  }
  Eigen::MatrixXd y = xhat;
  y.array().rowwise() *= gamma.value().row(0).array();
  y.rowwise() += beta.value().row(0);
  const int ia = a.id, ig = gamma.id, ibt = beta.id,
            out = static_cast<int>(t.size());
  return t.make(std::move(y), [ia, ig, ibt, out, inv, xhat](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    const Eigen::Index d = xhat.cols();
    t.grad_of(ig) += g.cwiseProduct(xhat).colwise().sum();
    t.grad_of(ibt) += g.colwise().sum();
    Eigen::MatrixXd& da = t.grad_of(ia);
    const auto& gam = t.val_of(ig);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const Eigen::RowVectorXd dxhat =
          g.row(i).cwiseProduct(gam.row(0));
      const double m1 = dxhat.mean();
      const double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
      da.row(i) +=
          inv(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2).matrix();
    }
  });
}

Var mean(Var a) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a.value().mean();
  return t.make(std::move(v), [ia, out](Tape& t) {
    const double g = t.grad_of(out)(0, 0);
    t.grad_of(ia).array() += g / t.val_of(ia).size();
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a.value().sum();
  return t.make(std::move(v), [ia, out](Tape& t) {
    t.grad_of(ia).array() += t.grad_of(out)(0, 0);
  });
}

Var select_rows(Var a, std::vector<int> rows) {
  Tape& t = *a.tape;
  for (int r : rows)
    check(r >= 0 && r < a.rows(), "select_rows: index out of range");
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    v.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(std::move(v), [ia, out, rows = std::move(rows)](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    Eigen::MatrixXd& da = t.grad_of(ia);
    for (std::size_t i = 0; i < rows.size(); ++i)
      da.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var entry(Var a, int i, int j) {
  check(i >= 0 && i < a.rows() && j >= 0 && j < a.cols(),
        "entry: index out of range");
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a.value()(i, j);
  return t.make(std::move(v), [ia, out, i, j](Tape& t) {
    t.grad_of(ia)(i, j) += t.grad_of(out)(0, 0);
  });
}

Var concat_cols(Var a, Var b) {
  check(a.rows() == b.rows(),
        "concat_cols: " + shape(a.value()) + " | " + shape(b.value()));
  Tape& t = *a.tape;
  Eigen::MatrixXd v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  const int ia = a.id, ib = b.id, out = static_cast<int>(t.size());
  const Eigen::Index ca = a.cols(), cb = b.cols();
  return t.make(std::move(v), [ia, ib, out, ca, cb](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    t.grad_of(ia) += g.leftCols(ca);
    t.grad_of(ib) += g.rightCols(cb);
  });
}

Var log(Var a) {
  Tape& t = *a.tape;
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(a.value().array().log().matrix(), [ia, out](Tape& t) {
    t.grad_of(ia) +=
        t.grad_of(out).cwiseQuotient(t.val_of(ia));
  });
}

Var sigmoid(Var a) {
  Tape& t = *a.tape;
  const Eigen::MatrixXd& x = a.value();
  Eigen::MatrixXd s(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    s(i) = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  }
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(std::move(s), [ia, out](Tape& t) {
    const Eigen::MatrixXd& s = t.val_of(out);
    t.grad_of(ia) += t.grad_of(out)
                         .cwiseProduct(s)
                         .cwiseProduct((1.0 - s.array()).matrix());
  });
}

Var log_sigmoid(Var a) {
  Tape& t = *a.tape;
  const Eigen::MatrixXd& x = a.value();
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    y(i) = v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
  }
  const int ia = a.id, out = static_cast<int>(t.size());
  return t.make(std::move(y), [ia, out](Tape& t) {
    const Eigen::MatrixXd& x = t.val_of(ia);
    Eigen::MatrixXd& da = t.grad_of(ia);
    const Eigen::MatrixXd& g = t.grad_of(out);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x(i);
      const double sneg = v >= 0.0 ? std::exp(-v) / (1.0 + std::exp(-v))
                                   : 1.0 / (1.0 + std::exp(v));
      da(i) += g(i) * sneg;  // d/dx log sigmoid(x) = sigmoid(-x)
    }
  });
}

Var scatter_edge_bias(Var per_edge,
                      const std::vector<std::pair<int, int>>& edges, int n) {
  check(per_edge.cols() == 1 &&
            per_edge.rows() == static_cast<Eigen::Index>(edges.size()),
        "scatter_edge_bias: expected |E|x1, got " + shape(per_edge.value()));
  Tape& t = *per_edge.tape;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    b(u, v) += per_edge.value()(static_cast<Eigen::Index>(e), 0);
    b(v, u) += per_edge.value()(static_cast<Eigen::Index>(e), 0);
  }
  const int ip = per_edge.id, out = static_cast<int>(t.size());
  return t.make(std::move(b), [ip, out, edges](Tape& t) {
    const Eigen::MatrixXd& g = t.grad_of(out);
    Eigen::MatrixXd& dp = t.grad_of(ip);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [u, v] = edges[e];
      dp(static_cast<Eigen::Index>(e), 0) += g(u, v) + g(v, u);
    }
  });
}

void sgd_step(const std::vector<Eigen::MatrixXd*>& params,
              const std::vector<Eigen::MatrixXd>& grads, double lr) {
  check(params.size() == grads.size(), "sgd_step: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] += lr * grads[i];
}

void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  check(params.size() == grads.size(), "adam_step: size mismatch");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      state.v.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  check(state.m.size() == params.size(), "adam_step: state size mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] =
        beta2 * state.v[i].array() + (1.0 - beta2) * grads[i].array().square();
    const Eigen::ArrayXXd mhat = state.m[i].array() / c1;
    const Eigen::ArrayXXd vhat = state.v[i].array() / c2;
    params[i]->array() += lr * mhat / (vhat.sqrt() + eps);
  }
}

}  // namespace pbnco::ad
