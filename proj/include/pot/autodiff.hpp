#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pot/util.hpp"

namespace pot {

class Tape;

namespace detail {
struct TensorState {
  Matrix value;
  Matrix grad;  // empty until backward touches the leaf
  bool requires_grad = false;
  bool is_leaf = true;
  std::uint64_t tape_id = 0;  // tape the node handle below belongs to
  int node = -1;
};
}  // namespace detail

// Dense matrix value with optional gradient tracking. Copies share state;
// scalars are 1x1. Ops record onto the innermost live Tape of this thread.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(state_); }
  const Matrix& value() const;
  double scalar_value() const;  // requires 1x1
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }

  bool requires_grad() const { return state_ && state_->requires_grad; }
  bool has_grad() const { return state_ && state_->grad.size() > 0; }
  const Matrix& grad() const;  // error when no gradient has been accumulated
  void zero_grad();

  // In-place value replacement (same shape); used by the optimizer between
  // tape lifetimes.
  void set_value(const Matrix& v);

 private:
  std::shared_ptr<detail::TensorState> state_;
  friend class Tape;
  friend int node_handle(const Tensor& t);
  friend Tensor from_op(Matrix value, int node);
};

// Ordered record of operations for one reverse sweep. Construction makes the
// tape active for the current thread (nestable); destruction restores the
// previous one. One backward per tape; build a fresh tape per step.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();
  std::uint64_t id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }

  // Scalar loss -> gradients accumulated into every reachable leaf. A loss
  // with no recorded node (fully detached) is a no-op: grads stay absent.
  void backward(const Tensor& loss);

  // Custom-op extension points. record() appends a node and returns its
  // handle; the vjp receives the node's output adjoint and pushes
  // contributions to parents via accumulate().
  int record(std::function<void(const Matrix&)> vjp);
  void accumulate(int node, const Matrix& delta);

 private:
  struct Node {
    std::function<void(const Matrix&)> vjp;
  };
  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  std::uint64_t id_;
  Tape* prev_;
  bool swept_ = false;
};

// Suspends recording on this thread while alive (evaluation-only scopes).
class NoGrad {
 public:
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  Tape* saved_;
};

// Node handle of t on the active tape: registers leaves lazily, -1 when t
// does not require grad or no tape is active. Interior tensors from a dead
// tape are a contract error.
int node_handle(const Tensor& t);

// Wraps an op result produced by a custom node.
Tensor from_op(Matrix value, int node);

void backward(const Tensor& loss);

// ---- operations ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor add_row_vector(const Tensor& a, const Tensor& row);  // N×d + 1×d
Tensor cwise_mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor prelu(const Tensor& a, double gamma);  // slope 1 at the kink
Tensor elu(const Tensor& a);
Tensor softplus(const Tensor& a);  // max(x,0)+log1p(exp(-|x|)); finite for |x|<=1e6
Tensor rowwise_l2_normalize(const Tensor& a);  // row norm < 1e-12 -> error
Tensor row_sum(const Tensor& a);               // N×d -> N×1
Tensor sum_all(const Tensor& a);               // -> 1×1
Tensor mean_all(const Tensor& a);              // -> 1×1
Tensor take_diagonal(const Tensor& a);         // N×N -> N×1
Tensor select_rows(const Tensor& a, const std::vector<int>& ids);
Tensor stop_gradient(const Tensor& a);

}  // namespace pot
