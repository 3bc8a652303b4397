#pragma once

// Minimal reverse-mode autodiff over dense Eigen matrices.  The tape owns
// every intermediate value; a Var is just an index into it.  Operations are
// limited to what the attention network needs, so each backward rule stays
// small enough to verify by finite differences (see tests/test_autodiff.cpp).

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace frgd::ad {

struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

class Tape {
 public:
  // Leaves. Gradients are accumulated only for requires_grad leaves and for
  // interior nodes on a path to one.
  Var leaf(const Eigen::MatrixXd& value, bool requires_grad = false);

  const Eigen::MatrixXd& val(Var v) const { return nodes_[v.idx].value; }
  const Eigen::MatrixXd& grad(Var v) const { return nodes_[v.idx].grad; }

  Var matmul(Var a, Var b);                 // A * B
  Var add(Var a, Var b);                    // A + B, same shape
  Var sub(Var a, Var b);                    // A - B, same shape
  Var add_rowvec(Var a, Var b);             // A.rowwise() + b, b is 1 x cols
  Var scale(Var a, double s);               // s * A
  Var add_const(Var a, const Eigen::MatrixXd& c);
  Var hcat(const std::vector<Var>& parts);  // [P0 P1 ...], equal row counts
  Var leaky_relu(Var a, double slope);
  Var elu(Var a);                           // alpha = 1

  // sin(t * omega + phi) elementwise: t is a constant n x 1 column, omega and
  // phi are 1 x d rows.  Result is n x d.
  Var sin_affine(const Eigen::VectorXd& t, Var omega, Var phi);

  Var gather_rows(Var a, const std::vector<int>& rows);
  // out[rows[i]] += a.row(i); output has n_out rows.
  Var scatter_rows(Var a, const std::vector<int>& rows, int n_out);
  // Each row i of A scaled by w(i, 0); w is rows x 1.
  Var mul_colvec(Var a, Var w);
  // Elementwise product with a constant matrix (dropout masks).
  Var mul_elem_const(Var a, const Eigen::MatrixXd& m);

  // Softmax within contiguous [begin, end) row ranges of an E x 1 column.
  Var segment_softmax(Var logits,
                      const std::vector<std::pair<int, int>>& segments);

  // Weighted mean cross-entropy of softmax(logits.row(r)) against labels[r]
  // over the given rows; returns a 1 x 1 scalar. `weights` is indexed by row
  // id (empty = uniform).
  Var ce_loss_masked(Var logits, const std::vector<int>& labels,
                     const std::vector<int>& rows,
                     const std::vector<double>& weights = {});

  // Seeds d(out)/d(out) = 1 (scalar out) and sweeps the tape in reverse.
  void backward(Var out);

  void clear();
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    std::function<void()> pull;  // propagates this node's grad to parents
    bool needs_grad = false;
  };

  Var push(Eigen::MatrixXd value, bool needs_grad, std::function<void()> pull);
  Eigen::MatrixXd& grad_ref(Var v) { return nodes_[v.idx].grad; }
  bool needs(Var v) const { return nodes_[v.idx].needs_grad; }

  std::vector<Node> nodes_;
};

}  // namespace frgd::ad
