#include "pot/autodiff.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "pot/errors.hpp"

namespace pot {

namespace {

thread_local Tape* g_active_tape = nullptr;
std::atomic<std::uint64_t> g_tape_counter{1};

using State = std::shared_ptr<detail::TensorState>;

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined())
    fail(ErrorKind::kValidation, std::string(op) + ": undefined tensor");
}

}  // namespace

// ---- Tensor ----

Tensor::Tensor(Matrix value, bool requires_grad) {
  state_ = std::make_shared<detail::TensorState>();
  state_->value = std::move(value);
  state_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Tensor(std::move(m), requires_grad);
}

const Matrix& Tensor::value() const {
  if (!state_) fail(ErrorKind::kValidation, "value() on undefined tensor");
  return state_->value;
}

double Tensor::scalar_value() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1)
    fail(ErrorKind::kDimension, "scalar_value() on non-1x1 tensor");
  return v(0, 0);
}

const Matrix& Tensor::grad() const {
  if (!has_grad())
    fail(ErrorKind::kContract,
         "grad() requested but no gradient has been accumulated");
  return state_->grad;
}

void Tensor::zero_grad() {
  if (state_) state_->grad.resize(0, 0);
}

void Tensor::set_value(const Matrix& v) {
  if (!state_) fail(ErrorKind::kValidation, "set_value() on undefined tensor");
  if (v.rows() != state_->value.rows() || v.cols() != state_->value.cols())
    fail(ErrorKind::kDimension, "set_value(): shape change is not allowed");
  state_->value = v;
}

// ---- Tape ----

Tape::Tape() : id_(g_tape_counter.fetch_add(1)), prev_(g_active_tape) {
  g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

NoGrad::NoGrad() : saved_(g_active_tape) { g_active_tape = nullptr; }
NoGrad::~NoGrad() { g_active_tape = saved_; }

int Tape::record(std::function<void(const Matrix&)> vjp) {
  nodes_.push_back(Node{std::move(vjp)});
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::accumulate(int node, const Matrix& delta) {
  if (node < 0 || node >= static_cast<int>(grads_.size()))
    fail(ErrorKind::kContract, "accumulate(): node handle out of range");
  if (grads_[node].size() == 0)
    grads_[node] = delta;
  else
    grads_[node] += delta;
}

void Tape::backward(const Tensor& loss) {
  check_defined(loss, "backward");
  if (loss.value().rows() != 1 || loss.value().cols() != 1)
    fail(ErrorKind::kDimension, "backward() requires a 1x1 loss tensor");
  if (swept_)
    fail(ErrorKind::kContract,
         "backward() already ran on this tape; build a fresh tape per step");
  swept_ = true;
  const auto& st = loss.state_;
  if (st->tape_id != id_ || st->node < 0) {
    if (st->tape_id != 0 && st->tape_id != id_)
      fail(ErrorKind::kContract, "backward(): loss belongs to another tape");
    return;  // fully detached loss: leaf grads stay absent
  }
  grads_.assign(nodes_.size(), Matrix());
  grads_[st->node] = Matrix::Ones(1, 1);
  // Emission order is a topological order; one reverse sweep visits each
  // recorded node exactly once.
  for (int i = st->node; i >= 0; --i) {
    if (grads_[i].size() == 0) continue;
    nodes_[i].vjp(grads_[i]);
    grads_[i].resize(0, 0);  // release adjoint memory as the sweep passes
  }
  grads_.clear();
}

int node_handle(const Tensor& t) {
  Tape* tp = Tape::active();
  if (!tp || !t.requires_grad()) return -1;
  auto& st = t.state_;
  if (st->tape_id == tp->id()) return st->node;
  if (!st->is_leaf)
    fail(ErrorKind::kContract,
         "tensor is an op result from a different tape; re-run the op on the "
         "active tape");
  // Lazily register the leaf: its vjp accumulates into the persistent grad.
  State captured = st;
  const int node = tp->record([captured](const Matrix& g) {
    if (captured->grad.size() == 0)
      captured->grad = Matrix::Zero(captured->value.rows(),
                                    captured->value.cols());
    captured->grad += g;
  });
  st->tape_id = tp->id();
  st->node = node;
  return node;
}

Tensor from_op(Matrix value, int node) {
  Tensor t(std::move(value), node >= 0);
  if (node >= 0) {
    t.state_->is_leaf = false;
    t.state_->tape_id = Tape::active()->id();
    t.state_->node = node;
  }
  return t;
}

void backward(const Tensor& loss) {
  Tape* tp = Tape::active();
  if (!tp)
    fail(ErrorKind::kContract, "backward() called with no active tape");
  tp->backward(loss);
}

// ---- op helpers ----

namespace {

// Unary op: result = fwd(a); vjp_local(g) returns the contribution to a.
Tensor unary_op(const Tensor& a, Matrix out,
                std::function<Matrix(const Matrix&)> vjp_local) {
  Tape* tp = Tape::active();
  const int na = node_handle(a);
  if (na < 0) return Tensor(std::move(out));
  const int node = tp->record(
      [tp, na, vjp_local = std::move(vjp_local)](const Matrix& g) {
        tp->accumulate(na, vjp_local(g));
      });
  return from_op(std::move(out), node);
}

Tensor binary_op(const Tensor& a, const Tensor& b, Matrix out,
                 std::function<Matrix(const Matrix&)> vjp_a,
                 std::function<Matrix(const Matrix&)> vjp_b) {
  Tape* tp = Tape::active();
  const int na = node_handle(a);
  const int nb = node_handle(b);
  if (na < 0 && nb < 0) return Tensor(std::move(out));
  const int node = tp->record([tp, na, nb, vjp_a = std::move(vjp_a),
                               vjp_b = std::move(vjp_b)](const Matrix& g) {
    if (na >= 0) tp->accumulate(na, vjp_a(g));
    if (nb >= 0) tp->accumulate(nb, vjp_b(g));
  });
  return from_op(std::move(out), node);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::kDimension,
         std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
             "x" + std::to_string(b.cols()) + " differ");
}

}  // namespace

// ---- operations ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.cols() != b.rows())
    fail(ErrorKind::kDimension,
         "matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
             std::to_string(b.rows()) + " differ");
  Matrix av = a.value(), bv = b.value();
  return binary_op(
      a, b, av * bv, [bv](const Matrix& g) { return g * bv.transpose(); },
      [av](const Matrix& g) { return av.transpose() * g; });
}

Tensor transpose(const Tensor& a) {
  check_defined(a, "transpose");
  return unary_op(a, a.value().transpose(),
                  [](const Matrix& g) { return g.transpose(); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  check_same_shape(a, b, "add");
  return binary_op(
      a, b, a.value() + b.value(), [](const Matrix& g) { return g; },
      [](const Matrix& g) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_defined(a, "sub");
  check_defined(b, "sub");
  check_same_shape(a, b, "sub");
  return binary_op(
      a, b, a.value() - b.value(), [](const Matrix& g) { return g; },
      [](const Matrix& g) { return Matrix(-g); });
}

Tensor neg(const Tensor& a) {
  check_defined(a, "neg");
  return unary_op(a, -a.value(), [](const Matrix& g) { return Matrix(-g); });
}

Tensor add_row_vector(const Tensor& a, const Tensor& row) {
  check_defined(a, "add_row_vector");
  check_defined(row, "add_row_vector");
  if (row.rows() != 1 || row.cols() != a.cols())
    fail(ErrorKind::kDimension,
         "add_row_vector: second operand must be 1x" +
             std::to_string(a.cols()));
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return binary_op(
      a, row, std::move(out), [](const Matrix& g) { return g; },
      [](const Matrix& g) { return Matrix(g.colwise().sum()); });
}

Tensor cwise_mul(const Tensor& a, const Tensor& b) {
  check_defined(a, "cwise_mul");
  check_defined(b, "cwise_mul");
  check_same_shape(a, b, "cwise_mul");
  Matrix av = a.value(), bv = b.value();
  return binary_op(
      a, b, av.cwiseProduct(bv),
      [bv](const Matrix& g) { return g.cwiseProduct(bv); },
      [av](const Matrix& g) { return g.cwiseProduct(av); });
}

Tensor scale(const Tensor& a, double s) {
  check_defined(a, "scale");
  return unary_op(a, s * a.value(),
                  [s](const Matrix& g) { return Matrix(s * g); });
}

Tensor exp(const Tensor& a) {
  check_defined(a, "exp");
  Matrix out = a.value().array().exp().matrix();
  Matrix captured = out;
  return unary_op(a, std::move(out), [captured](const Matrix& g) {
    return g.cwiseProduct(captured);
  });
}

Tensor log(const Tensor& a) {
  check_defined(a, "log");
  Matrix av = a.value();
  return unary_op(a, av.array().log().matrix(), [av](const Matrix& g) {
    return Matrix((g.array() / av.array()).matrix());
  });
}

Tensor prelu(const Tensor& a, double gamma) {
  check_defined(a, "prelu");
  Matrix av = a.value();
  Matrix out = av.unaryExpr(
      [gamma](double x) { return x >= 0 ? x : gamma * x; });
  return unary_op(a, std::move(out), [av, gamma](const Matrix& g) {
    Matrix slope = av.unaryExpr(
        [gamma](double x) { return x >= 0 ? 1.0 : gamma; });
    // Evaluate before returning: the product must not outlive `slope`.
    return Matrix(g.cwiseProduct(slope));
  });
}

Tensor elu(const Tensor& a) {
  check_defined(a, "elu");
  Matrix av = a.value();
  Matrix out = av.unaryExpr(
      [](double x) { return x > 0 ? x : std::expm1(x); });
  return unary_op(a, std::move(out), [av](const Matrix& g) {
    Matrix slope =
        av.unaryExpr([](double x) { return x > 0 ? 1.0 : std::exp(x); });
    return Matrix(g.cwiseProduct(slope));
  });
}

Tensor softplus(const Tensor& a) {
  check_defined(a, "softplus");
  Matrix av = a.value();
  Matrix out = av.unaryExpr([](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  });
  return unary_op(a, std::move(out), [av](const Matrix& g) {
    Matrix slope = av.unaryExpr([](double x) {
      if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    });
    return Matrix(g.cwiseProduct(slope));
  });
}

Tensor rowwise_l2_normalize(const Tensor& a) {
  check_defined(a, "rowwise_l2_normalize");
  Matrix av = a.value();
  Vector norms(av.rows());
  for (int i = 0; i < av.rows(); ++i) {
    norms(i) = av.row(i).norm();
    if (norms(i) < 1e-12)
      fail(ErrorKind::kDegenerate,
           "rowwise_l2_normalize: row " + std::to_string(i) +
               " has norm < 1e-12");
  }
  Matrix out = norms.cwiseInverse().asDiagonal() * av;
  Matrix captured = out;
  return unary_op(a, std::move(out), [captured, norms](const Matrix& g) {
    Matrix res(g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i) {
      const double dot = g.row(i).dot(captured.row(i));
      res.row(i) = (g.row(i) - dot * captured.row(i)) / norms(i);
    }
    return res;
  });
}

Tensor row_sum(const Tensor& a) {
  check_defined(a, "row_sum");
  const int cols = a.cols();
  return unary_op(a, a.value().rowwise().sum(), [cols](const Matrix& g) {
    return Matrix(g.replicate(1, cols));
  });
}

Tensor sum_all(const Tensor& a) {
  check_defined(a, "sum_all");
  const int r = a.rows(), c = a.cols();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return unary_op(a, std::move(out), [r, c](const Matrix& g) {
    return Matrix(g(0, 0) * Matrix::Ones(r, c));
  });
}

Tensor mean_all(const Tensor& a) {
  check_defined(a, "mean_all");
  const int r = a.rows(), c = a.cols();
  Matrix out(1, 1);
  out(0, 0) = a.value().mean();
  return unary_op(a, std::move(out), [r, c](const Matrix& g) {
    return Matrix(g(0, 0) / (static_cast<double>(r) * c) * Matrix::Ones(r, c));
  });
}

Tensor take_diagonal(const Tensor& a) {
  check_defined(a, "take_diagonal");
  if (a.rows() != a.cols())
    fail(ErrorKind::kDimension, "take_diagonal: matrix must be square");
  const int n = a.rows();
  return unary_op(a, a.value().diagonal(), [n](const Matrix& g) {
    Matrix res = Matrix::Zero(n, n);
    res.diagonal() = g.col(0);
    return res;
  });
}

Tensor select_rows(const Tensor& a, const std::vector<int>& ids) {
  check_defined(a, "select_rows");
  const int r = a.rows(), c = a.cols();
  for (int id : ids)
    if (id < 0 || id >= r)
      fail(ErrorKind::kValidation,
           "select_rows: index " + std::to_string(id) + " out of [0," +
               std::to_string(r) + ")");
  Matrix out(static_cast<int>(ids.size()), c);
  for (std::size_t k = 0; k < ids.size(); ++k)
    out.row(static_cast<int>(k)) = a.value().row(ids[k]);
  return unary_op(a, std::move(out), [ids, r, c](const Matrix& g) {
    Matrix res = Matrix::Zero(r, c);
    for (std::size_t k = 0; k < ids.size(); ++k)
      res.row(ids[k]) += g.row(static_cast<int>(k));
    return res;
  });
}

Tensor stop_gradient(const Tensor& a) {
  check_defined(a, "stop_gradient");
  return Tensor(a.value());
}

}  // namespace pot
