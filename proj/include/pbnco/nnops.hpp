#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pbnco/autodiff.hpp"

// Value-level twins of the tape ops. Network code is templated on a
// context whose Value type is either Eigen::MatrixXd (fast inference) or
// ad::Var (training); overload resolution picks the path. The Var
// overloads are the tape ops themselves (re-exported, so argument-
// dependent lookup agrees), which keeps forward values identical.
namespace pbnco::nn {

using Eigen::MatrixXd;

using ad::add;
using ad::add_rowvec;
using ad::cmul;
using ad::concat_cols;
using ad::entry;
using ad::gelu;
using ad::layer_norm;
using ad::log;
using ad::log_sigmoid;
using ad::masked_row_softmax;
using ad::matmul;
using ad::mean;
using ad::scale;
using ad::scatter_edge_bias;
using ad::select_rows;
using ad::sigmoid;
using ad::sub;
using ad::sum;
using ad::transpose;

inline MatrixXd matmul(const MatrixXd& a, const MatrixXd& b) { return a * b; }

inline MatrixXd add(const MatrixXd& a, const MatrixXd& b) { return a + b; }

inline MatrixXd sub(const MatrixXd& a, const MatrixXd& b) { return a - b; }

inline MatrixXd cmul(const MatrixXd& a, const MatrixXd& b) {
  return a.cwiseProduct(b);
}

inline MatrixXd scale(const MatrixXd& a, double c) { return a * c; }

inline MatrixXd add_rowvec(const MatrixXd& a, const MatrixXd& r) {
  MatrixXd v = a;
  v.rowwise() += r.row(0);
  return v;
}

inline MatrixXd transpose(const MatrixXd& a) { return a.transpose(); }

inline MatrixXd masked_row_softmax(const MatrixXd& a, const MatrixXd& mask) {
  return ad::masked_softmax_value(a, mask);
}

inline MatrixXd gelu(const MatrixXd& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kK = 0.044715;
  MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    y(i) = 0.5 * v * (1.0 + std::tanh(kC * (v + kK * v * v * v)));
  }
  return y;
}

inline MatrixXd layer_norm(const MatrixXd& x, const MatrixXd& gamma,
                           const MatrixXd& beta, double eps = 1e-5) {
  MatrixXd y(x.rows(), x.cols());
  const Eigen::Index d = x.cols();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().sum() / d;
    y.row(i) = ((x.row(i).array() - mu) / std::sqrt(var + eps)) *
                   gamma.row(0).array() +
               beta.row(0).array();
  }
  return y;
}

inline MatrixXd concat_cols(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd v(a.rows(), a.cols() + b.cols());
  v << a, b;
  return v;
}

inline MatrixXd sigmoid(const MatrixXd& x) {
  MatrixXd s(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    s(i) = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  }
  return s;
}

inline MatrixXd log_sigmoid(const MatrixXd& x) {
  MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    y(i) = v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
  }
  return y;
}

inline MatrixXd log(const MatrixXd& a) { return a.array().log().matrix(); }

inline MatrixXd sum(const MatrixXd& a) {
  MatrixXd v(1, 1);
  v(0, 0) = a.sum();
  return v;
}

inline MatrixXd mean(const MatrixXd& a) {
  MatrixXd v(1, 1);
  v(0, 0) = a.mean();
  return v;
}

inline MatrixXd entry(const MatrixXd& a, int i, int j) {
  MatrixXd v(1, 1);
  v(0, 0) = a(i, j);
  return v;
}

inline MatrixXd select_rows(const MatrixXd& a, const std::vector<int>& rows) {
  MatrixXd v(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    v.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
  return v;
}

/// Forward value of either path; lets templated code branch on values
/// (sampling, masking) without touching the tape.
inline const MatrixXd& value_of(const MatrixXd& m) { return m; }
inline const MatrixXd& value_of(ad::Var v) { return v.value(); }

inline MatrixXd scatter_edge_bias(const MatrixXd& per_edge,
                                  const std::vector<std::pair<int, int>>& edges,
                                  int n) {
  if (per_edge.cols() != 1 ||
      per_edge.rows() != static_cast<Eigen::Index>(edges.size()))
    throw std::invalid_argument("scatter_edge_bias: expected |E|x1");
  MatrixXd b = MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    b(u, v) += per_edge(static_cast<Eigen::Index>(e), 0);
    b(v, u) += per_edge(static_cast<Eigen::Index>(e), 0);
  }
  return b;
}

}  // namespace pbnco::nn
