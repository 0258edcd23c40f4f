#include "arsjoint/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "arsjoint/errors.hpp"

namespace arsjoint {

const Matrix& Var::value() const {
  require(tape_ != nullptr, "use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::push(Matrix value, bool needs_grad, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = record_ && needs_grad;
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  auto& node = nodes_[id];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) {
  return push(std::move(value), true, [](Tape&, const Matrix&) {});
}

Var Tape::parameter(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Parameter* target = &p;
  auto v = push(p.value, true, [target](Tape&, const Matrix& g) { target->grad += g; });
  bound_.emplace(&p, v.id());
  return v;
}

Var Tape::embedding(Parameter& table, std::span<const int> rows) {
  Matrix value(static_cast<Eigen::Index>(rows.size()), table.value.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < table.value.rows(), "embedding row out of range");
    value.row(static_cast<Eigen::Index>(i)) = table.value.row(rows[i]);
  }
  Parameter* target = &table;
  std::vector<int> ids(rows.begin(), rows.end());
  return push(std::move(value), true, [target, ids = std::move(ids)](Tape&, const Matrix& g) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      target->grad.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    }
  });
}

void Tape::backward(const Var& scalar_output) {
  require(record_, "backward() on a non-recording tape");
  require(scalar_output.rows() == 1 && scalar_output.cols() == 1, "backward() needs a scalar");
  for (auto& node : nodes_) node.grad.resize(0, 0);
  accumulate(scalar_output.id(), Matrix::Ones(1, 1));
  for (std::size_t i = scalar_output.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad.size() == 0 || !node.backward) continue;
    node.backward(*this, node.grad);
  }
}

Matrix Tape::grad(const Var& v) const {
  const auto& node = nodes_[v.id()];
  if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

namespace {

bool any_grad(const Var& a) { return a.tape().needs_grad(a.id()); }
bool any_grad(const Var& a, const Var& b) { return any_grad(a) || any_grad(b); }

void same_tape(const Var& a, const Var& b) {
  require(a.valid() && b.valid() && &a.tape() == &b.tape(), "operands live on different tapes");
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b);
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() * b.value(), any_grad(a, b), [ia, ib](Tape& t, const Matrix& g) {
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  same_tape(a, b);
  require(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() * b.value().transpose(), any_grad(a, b),
                       [ia, ib](Tape& t, const Matrix& g) {
                         if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib));
                         if (t.needs_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
                       });
}

Var add(const Var& a, const Var& b) {
  same_tape(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value() + b.value(), any_grad(a, b), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var add_row(const Var& a, const Var& row) {
  same_tape(a, row);
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: bias must be 1 x cols");
  const auto ia = a.id(), ir = row.id();
  Matrix value = a.value().rowwise() + row.value().row(0);
  return a.tape().push(std::move(value), any_grad(a, row), [ia, ir](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    if (t.needs_grad(ir)) t.accumulate(ir, g.colwise().sum());
  });
}

Var affine(const Var& x, const Var& w, const Var& b) { return add_row(matmul_nt(x, w), b); }

Var scale(const Var& a, double c) {
  const auto ia = a.id();
  return a.tape().push(a.value() * c, any_grad(a),
                       [ia, c](Tape& t, const Matrix& g) { t.accumulate(ia, g * c); });
}

Var hadamard(const Var& a, const Var& b) {
  same_tape(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shape mismatch");
  const auto ia = a.id(), ib = b.id();
  return a.tape().push(a.value().cwiseProduct(b.value()), any_grad(a, b),
                       [ia, ib](Tape& t, const Matrix& g) {
                         if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                         if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                       });
}

Var tanh(const Var& a) {
  const auto ia = a.id();
  return a.tape().push(a.value().array().tanh().matrix(), any_grad(a),
                       [ia](Tape& t, const Matrix& g) {
                         const auto y = t.value(ia).array().tanh();
                         t.accumulate(ia, (g.array() * (1.0 - y.square())).matrix());
                       });
}

namespace {

Matrix softmax_rows_value(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double shift = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - shift).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

}  // namespace

Var softmax_rows(const Var& a) {
  require(a.cols() >= 1, "softmax over an empty row");
  const auto ia = a.id();
  return a.tape().push(softmax_rows_value(a.value()), any_grad(a),
                       [ia](Tape& t, const Matrix& g) {
                         const Matrix y = softmax_rows_value(t.value(ia));
                         Matrix dx(y.rows(), y.cols());
                         for (Eigen::Index r = 0; r < y.rows(); ++r) {
                           const double inner = g.row(r).dot(y.row(r));
                           dx.row(r) = y.row(r).cwiseProduct(
                               (g.row(r).array() - inner).matrix());
                         }
                         t.accumulate(ia, dx);
                       });
}

Var transpose(const Var& a) {
  const auto ia = a.id();
  return a.tape().push(a.value().transpose(), any_grad(a),
                       [ia](Tape& t, const Matrix& g) { t.accumulate(ia, g.transpose()); });
}

Var sum(const Var& a) {
  const auto ia = a.id();
  const auto rows = a.rows(), cols = a.cols();
  return a.tape().push(Matrix::Constant(1, 1, a.value().sum()), any_grad(a),
                       [ia, rows, cols](Tape& t, const Matrix& g) {
                         t.accumulate(ia, Matrix::Constant(rows, cols, g(0, 0)));
                       });
}

Var mean(const Var& a) {
  require(a.value().size() > 0, "mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var slice_rows(const Var& a, Eigen::Index begin, Eigen::Index end) {
  require(0 <= begin && begin <= end && end <= a.rows(), "slice_rows: bad range");
  const auto ia = a.id();
  const auto rows = a.rows(), cols = a.cols();
  return a.tape().push(a.value().middleRows(begin, end - begin), any_grad(a),
                       [ia, rows, cols, begin, end](Tape& t, const Matrix& g) {
                         Matrix full = Matrix::Zero(rows, cols);
                         full.middleRows(begin, end - begin) = g;
                         t.accumulate(ia, full);
                       });
}

Var gather_rows(const Var& a, std::span<const int> rows) {
  const auto ia = a.id();
  Matrix value(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < a.rows(), "gather_rows: index out of range");
    value.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<int> ids(rows.begin(), rows.end());
  const auto total = a.rows(), cols = a.cols();
  return a.tape().push(std::move(value), any_grad(a),
                       [ia, ids = std::move(ids), total, cols](Tape& t, const Matrix& g) {
                         Matrix full = Matrix::Zero(total, cols);
                         for (std::size_t i = 0; i < ids.size(); ++i) {
                           full.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
                         }
                         t.accumulate(ia, full);
                       });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: nothing to concatenate");
  Tape& tape = parts.front().tape();
  const auto cols = parts.front().cols();
  Eigen::Index total = 0;
  bool grad = false;
  std::vector<std::size_t> ids;
  for (const auto& part : parts) {
    require(&part.tape() == &tape, "operands live on different tapes");
    require(part.cols() == cols, "concat_rows: column mismatch");
    total += part.rows();
    grad = grad || any_grad(part);
    ids.push_back(part.id());
  }
  Matrix value(total, cols);
  Eigen::Index offset = 0;
  for (const auto& part : parts) {
    value.middleRows(offset, part.rows()) = part.value();
    offset += part.rows();
  }
  return tape.push(std::move(value), grad, [ids = std::move(ids)](Tape& t, const Matrix& g) {
    Eigen::Index at = 0;
    for (auto id : ids) {
      const auto n = t.value(id).rows();
      if (t.needs_grad(id)) t.accumulate(id, g.middleRows(at, n));
      at += n;
    }
  });
}

Var column(const Var& a, Eigen::Index c) {
  require(0 <= c && c < a.cols(), "column: index out of range");
  const auto ia = a.id();
  const auto rows = a.rows(), cols = a.cols();
  return a.tape().push(a.value().col(c), any_grad(a), [ia, rows, cols, c](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(rows, cols);
    full.col(c) = g.col(0);
    t.accumulate(ia, full);
  });
}

Var pick(const Var& a, Eigen::Index r, Eigen::Index c) {
  require(0 <= r && r < a.rows() && 0 <= c && c < a.cols(), "pick: index out of range");
  const auto ia = a.id();
  const auto rows = a.rows(), cols = a.cols();
  return a.tape().push(Matrix::Constant(1, 1, a.value()(r, c)), any_grad(a),
                       [ia, rows, cols, r, c](Tape& t, const Matrix& g) {
                         Matrix full = Matrix::Zero(rows, cols);
                         full(r, c) = g(0, 0);
                         t.accumulate(ia, full);
                       });
}

Var one_minus(const Var& a) {
  const auto ia = a.id();
  return a.tape().push((1.0 - a.value().array()).matrix(), any_grad(a),
                       [ia](Tape& t, const Matrix& g) { t.accumulate(ia, -g); });
}

Var log_clamped(const Var& a, double eps) {
  const auto ia = a.id();
  const double lo = eps, hi = 1.0 - eps;
  Matrix value = a.value().unaryExpr([lo, hi](double x) { return std::log(std::clamp(x, lo, hi)); });
  return a.tape().push(std::move(value), any_grad(a), [ia, lo, hi](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    Matrix dx(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = x.data()[i];
      dx.data()[i] = (xi < lo || xi > hi) ? 0.0 : g.data()[i] / xi;
    }
    t.accumulate(ia, dx);
  });
}

Var clamp(const Var& a, double lo, double hi) {
  require(lo <= hi, "clamp: empty interval");
  const auto ia = a.id();
  Matrix value = a.value().unaryExpr([lo, hi](double x) { return std::clamp(x, lo, hi); });
  return a.tape().push(std::move(value), any_grad(a), [ia, lo, hi](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    Matrix dx(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = x.data()[i];
      dx.data()[i] = (xi < lo || xi > hi) ? 0.0 : g.data()[i];
    }
    t.accumulate(ia, dx);
  });
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  require(x.size() >= 1, "softmax of an empty vector");
  Matrix row = x.transpose();
  return softmax_rows_value(row).transpose();
}

}  // namespace arsjoint
