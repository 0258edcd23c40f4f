#pragma once

// Reverse-mode differentiation over dense matrices. A Tape records every
// operation of one forward pass; Tape::backward walks it in reverse and
// accumulates gradients into leaves and into bound Parameters.
//
// Convention: sequences are row-major, one row per token/unit. Affine maps
// take W as (out x in) and b as (1 x out): y = x W^T + b.

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "arsjoint/parameters.hpp"

namespace arsjoint {

inline constexpr double kLogEpsilon = 1e-7;

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad)>;

  // record=false builds values only (inference); backward() is then unavailable.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Differentiable input whose gradient is read back with grad().
  Var variable(Matrix value);
  // Binds a trainable parameter; backward() adds into p.grad. One node per Parameter.
  Var parameter(Parameter& p);
  // Gathers rows of an embedding table; backward() scatters into table.grad.
  Var embedding(Parameter& table, std::span<const int> rows);

  void backward(const Var& scalar_output);
  Matrix grad(const Var& v) const;

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // Op implementation hooks.
  Var push(Matrix value, bool needs_grad, Backward backward);
  void accumulate(std::size_t id, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
};

// y = A B
Var matmul(const Var& a, const Var& b);
// y = A B^T
Var matmul_nt(const Var& a, const Var& b);
// y = x W^T + b with b broadcast over rows.
Var affine(const Var& x, const Var& w, const Var& b);
Var add(const Var& a, const Var& b);
// Adds a (1 x n) row to every row of a.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double c);
Var hadamard(const Var& a, const Var& b);
Var tanh(const Var& a);
Var softmax_rows(const Var& a);
Var transpose(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var slice_rows(const Var& a, Eigen::Index begin, Eigen::Index end);
Var gather_rows(const Var& a, std::span<const int> rows);
Var concat_rows(std::span<const Var> parts);
Var column(const Var& a, Eigen::Index c);
Var pick(const Var& a, Eigen::Index r, Eigen::Index c);
// 1 - a
Var one_minus(const Var& a);
// Elementwise clamp into [lo, hi]; zero gradient outside.
Var clamp(const Var& a, double lo, double hi);
// log(clamp(a, eps, 1-eps)); zero gradient where clamping is active.
Var log_clamped(const Var& a, double eps = kLogEpsilon);

// Numerically stable softmax of a plain vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& x);

}  // namespace arsjoint
