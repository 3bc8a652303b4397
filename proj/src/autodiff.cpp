#include "frgd/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace frgd::ad {

Var Tape::push(Eigen::MatrixXd value, bool needs_grad,
               std::function<void()> pull) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) {
    n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    n.pull = std::move(pull);
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(const Eigen::MatrixXd& value, bool requires_grad) {
  return push(value, requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
  Eigen::MatrixXd out = val(a) * val(b);
  bool ng = needs(a) || needs(b);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, b, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    if (t->needs(a)) t->grad_ref(a) += g * t->val(b).transpose();
    if (t->needs(b)) t->grad_ref(b) += t->val(a).transpose() * g;
  });
}

Var Tape::add(Var a, Var b) {
  Eigen::MatrixXd out = val(a) + val(b);
  bool ng = needs(a) || needs(b);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, b, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    if (t->needs(a)) t->grad_ref(a) += g;
    if (t->needs(b)) t->grad_ref(b) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  Eigen::MatrixXd out = val(a) - val(b);
  bool ng = needs(a) || needs(b);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, b, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    if (t->needs(a)) t->grad_ref(a) += g;
    if (t->needs(b)) t->grad_ref(b) -= g;
  });
}

Var Tape::add_rowvec(Var a, Var b) {
  if (val(b).rows() != 1 || val(b).cols() != val(a).cols())
    throw std::invalid_argument("add_rowvec: b must be 1 x cols(a)");
  Eigen::MatrixXd out = val(a).rowwise() + val(b).row(0);
  bool ng = needs(a) || needs(b);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, b, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    if (t->needs(a)) t->grad_ref(a) += g;
    if (t->needs(b)) t->grad_ref(b) += g.colwise().sum();
  });
}

Var Tape::scale(Var a, double s) {
  Eigen::MatrixXd out = s * val(a);
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, s, self]() {
    if (t->needs(a)) t->grad_ref(a) += s * t->nodes_[self].grad;
  });
}

Var Tape::add_const(Var a, const Eigen::MatrixXd& c) {
  Eigen::MatrixXd out = val(a) + c;
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, self]() {
    if (t->needs(a)) t->grad_ref(a) += t->nodes_[self].grad;
  });
}

Var Tape::hcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("hcat: empty part list");
  Eigen::Index rows = val(parts[0]).rows(), cols = 0;
  bool ng = false;
  for (Var p : parts) {
    if (val(p).rows() != rows)
      throw std::invalid_argument("hcat: row count mismatch");
    cols += val(p).cols();
    ng = ng || needs(p);
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, val(p).cols()) = val(p);
    at += val(p).cols();
  }
  Tape* t = this;
  int self = size();
  std::vector<Var> ps = parts;
  return push(std::move(out), ng, [t, ps, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    Eigen::Index at = 0;
    for (Var p : ps) {
      Eigen::Index w = t->val(p).cols();
      if (t->needs(p)) t->grad_ref(p) += g.middleCols(at, w);
      at += w;
    }
  });
}

Var Tape::leaky_relu(Var a, double slope) {
  const Eigen::MatrixXd& x = val(a);
  Eigen::MatrixXd out =
      (x.array() > 0.0).select(x.array(), slope * x.array());
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, slope, self]() {
    if (!t->needs(a)) return;
    const Eigen::MatrixXd& x = t->val(a);
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    t->grad_ref(a).array() +=
        (x.array() > 0.0).select(g.array(), slope * g.array());
  });
}

Var Tape::elu(Var a) {
  const Eigen::MatrixXd& x = val(a);
  Eigen::MatrixXd out =
      (x.array() > 0.0).select(x.array(), x.array().exp() - 1.0);
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, self]() {
    if (!t->needs(a)) return;
    const Eigen::MatrixXd& x = t->val(a);
    const Eigen::MatrixXd& y = t->nodes_[self].value;
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    // d/dx = 1 for x > 0, exp(x) = y + 1 otherwise
    t->grad_ref(a).array() +=
        (x.array() > 0.0).select(g.array(), g.array() * (y.array() + 1.0));
  });
}

Var Tape::sin_affine(const Eigen::VectorXd& t_col, Var omega, Var phi) {
  if (val(omega).rows() != 1 || val(phi).rows() != 1 ||
      val(omega).cols() != val(phi).cols())
    throw std::invalid_argument("sin_affine: omega/phi must be matching rows");
  Eigen::Index n = t_col.size(), d = val(omega).cols();
  Eigen::MatrixXd arg = t_col * val(omega) + Eigen::VectorXd::Ones(n) * val(phi);
  Eigen::MatrixXd out = arg.array().sin();
  bool ng = needs(omega) || needs(phi);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, t_col, omega, phi, self, n, d]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    Eigen::MatrixXd arg =
        t_col * t->val(omega) + Eigen::VectorXd::Ones(n) * t->val(phi);
    Eigen::MatrixXd gcos = g.array() * arg.array().cos();
    if (t->needs(omega))
      t->grad_ref(omega) += t_col.transpose() * gcos;  // 1 x d
    if (t->needs(phi)) t->grad_ref(phi) += gcos.colwise().sum();
    (void)d;
  });
}

Var Tape::gather_rows(Var a, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), val(a).cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = val(a).row(rows[i]);
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, rows, self]() {
    if (!t->needs(a)) return;
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    for (size_t i = 0; i < rows.size(); ++i)
      t->grad_ref(a).row(rows[i]) += g.row(i);
  });
}

Var Tape::scatter_rows(Var a, const std::vector<int>& rows, int n_out) {
  if (static_cast<Eigen::Index>(rows.size()) != val(a).rows())
    throw std::invalid_argument("scatter_rows: index count != rows(a)");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_out, val(a).cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) += val(a).row(i);
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, rows, self]() {
    if (!t->needs(a)) return;
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    for (size_t i = 0; i < rows.size(); ++i)
      t->grad_ref(a).row(i) += g.row(rows[i]);
  });
}

Var Tape::mul_colvec(Var a, Var w) {
  if (val(w).cols() != 1 || val(w).rows() != val(a).rows())
    throw std::invalid_argument("mul_colvec: w must be rows(a) x 1");
  Eigen::MatrixXd out =
      val(a).array().colwise() * val(w).col(0).array();
  bool ng = needs(a) || needs(w);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, w, self]() {
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    if (t->needs(a))
      t->grad_ref(a).array() += g.array().colwise() * t->val(w).col(0).array();
    if (t->needs(w))
      t->grad_ref(w).col(0) +=
          (g.array() * t->val(a).array()).rowwise().sum().matrix();
  });
}

Var Tape::mul_elem_const(Var a, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = val(a).array() * m.array();
  bool ng = needs(a);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, a, m, self]() {
    if (t->needs(a))
      t->grad_ref(a).array() += t->nodes_[self].grad.array() * m.array();
  });
}

Var Tape::segment_softmax(Var logits,
                          const std::vector<std::pair<int, int>>& segments) {
  if (val(logits).cols() != 1)
    throw std::invalid_argument("segment_softmax: logits must be E x 1");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(val(logits).rows(), 1);
  for (auto [b, e] : segments) {
    if (b >= e) continue;
    double mx = val(logits).col(0).segment(b, e - b).maxCoeff();
    double z = 0.0;
    for (int i = b; i < e; ++i) {
      out(i, 0) = std::exp(val(logits)(i, 0) - mx);
      z += out(i, 0);
    }
    for (int i = b; i < e; ++i) out(i, 0) /= z;
  }
  bool ng = needs(logits);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, logits, segments, self]() {
    if (!t->needs(logits)) return;
    const Eigen::MatrixXd& y = t->nodes_[self].value;
    const Eigen::MatrixXd& g = t->nodes_[self].grad;
    for (auto [b, e] : segments) {
      if (b >= e) continue;
      double dot = 0.0;
      for (int i = b; i < e; ++i) dot += y(i, 0) * g(i, 0);
      for (int i = b; i < e; ++i)
        t->grad_ref(logits)(i, 0) += y(i, 0) * (g(i, 0) - dot);
    }
  });
}

Var Tape::ce_loss_masked(Var logits, const std::vector<int>& labels,
                         const std::vector<int>& rows,
                         const std::vector<double>& weights) {
  if (rows.empty())
    throw std::invalid_argument("ce_loss_masked: no labeled rows");
  if (!weights.empty() && weights.size() != labels.size())
    throw std::invalid_argument("ce_loss_masked: weight/label size mismatch");
  const Eigen::MatrixXd& x = val(logits);
  double loss = 0.0;
  double wsum = 0.0;
  for (int r : rows) {
    double w = weights.empty() ? 1.0 : weights[r];
    double mx = x.row(r).maxCoeff();
    double z = (x.row(r).array() - mx).exp().sum();
    loss += -w * (x(r, labels[r]) - mx - std::log(z));
    wsum += w;
  }
  if (wsum <= 0.0)
    throw std::invalid_argument("ce_loss_masked: non-positive weight sum");
  loss /= wsum;
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = loss;
  bool ng = needs(logits);
  Tape* t = this;
  int self = size();
  return push(std::move(out), ng, [t, logits, labels, rows, weights, wsum,
                                   self]() {
    if (!t->needs(logits)) return;
    double g = t->nodes_[self].grad(0, 0) / wsum;
    const Eigen::MatrixXd& x = t->val(logits);
    for (int r : rows) {
      double w = weights.empty() ? 1.0 : weights[r];
      double mx = x.row(r).maxCoeff();
      Eigen::RowVectorXd p = (x.row(r).array() - mx).exp();
      p /= p.sum();
      p(labels[r]) -= 1.0;
      t->grad_ref(logits).row(r) += g * w * p;
    }
  });
}

void Tape::backward(Var out) {
  if (val(out).size() != 1)
    throw std::invalid_argument("backward: output must be scalar");
  if (!needs(out)) return;
  grad_ref(out)(0, 0) = 1.0;
  for (int i = out.idx; i >= 0; --i) {
    if (nodes_[i].needs_grad && nodes_[i].pull) nodes_[i].pull();
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace frgd::ad
