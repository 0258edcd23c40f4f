#include "arsjoint/loss.hpp"

#include <algorithm>
#include <cmath>

#include "arsjoint/errors.hpp"

namespace arsjoint {

namespace {

double clamped_log(double x) { return std::log(std::clamp(x, kLogEpsilon, 1.0 - kLogEpsilon)); }

}  // namespace

Var cross_entropy(const Var& p, int y) {
  require(p.rows() == 1, "cross_entropy: expects a probability row");
  require(y >= 0 && y < p.cols(), "cross_entropy: class index out of range");
  return scale(log_clamped(pick(p, 0, y)), -1.0);
}

Var rationale_cross_entropy(const Var& p_r, std::span<const int> labels) {
  require(p_r.cols() == 2 && p_r.rows() == static_cast<Eigen::Index>(labels.size()),
          "rationale_cross_entropy: shape mismatch");
  require(!labels.empty(), "rationale_cross_entropy: no sentences");
  // Select p_r[i][y_i] with a 0/1 mask so one node covers all rows.
  Matrix mask = Matrix::Zero(p_r.rows(), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] == 0 || labels[i] == 1, "rationale label must be 0 or 1");
    mask(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  const auto picked = hadamard(log_clamped(p_r), p_r.tape().constant(std::move(mask)));
  return scale(sum(picked), -1.0 / static_cast<double>(labels.size()));
}

Var rr_divergence(const Var& p, const Var& q) {
  require(p.rows() == q.rows() && p.cols() == q.cols(), "rr_divergence: length mismatch");
  const auto pc = clamp(p, kLogEpsilon, 1.0 - kLogEpsilon);
  const auto qc = clamp(q, kLogEpsilon, 1.0 - kLogEpsilon);
  const auto pos = hadamard(pc, log_clamped(qc));
  const auto neg = hadamard(one_minus(pc), log_clamped(one_minus(qc)));
  return scale(sum(add(pos, neg)), -1.0);
}

Var rr_loss(const Var& alphas, const Var& rationale_probs) {
  return add(rr_divergence(alphas, rationale_probs), rr_divergence(rationale_probs, alphas));
}

double cross_entropy(const Eigen::VectorXd& p, int y) {
  require(y >= 0 && y < p.size(), "cross_entropy: class index out of range");
  return -clamped_log(p[y]);
}

double rr_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  require(p.size() == q.size(), "rr_divergence: length mismatch");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = std::clamp(p[i], kLogEpsilon, 1.0 - kLogEpsilon);
    const double qi = std::clamp(q[i], kLogEpsilon, 1.0 - kLogEpsilon);
    d -= pi * std::log(qi) + (1.0 - pi) * std::log(1.0 - qi);
  }
  return d;
}

double rr_loss(const Eigen::VectorXd& alphas, const Eigen::VectorXd& rationale_probs) {
  return rr_divergence(alphas, rationale_probs) + rr_divergence(rationale_probs, alphas);
}

void LossWeights::validate() const {
  require(lambda1 >= 0 && lambda2 >= 0 && lambda3 >= 0 && gamma >= 0,
          "loss weights must be non-negative");
}

LossBreakdown joint_loss(double retrieval, double rationale, double stance, double rr,
                         const LossWeights& weights) {
  weights.validate();
  LossBreakdown out{retrieval, rationale, stance, rr, 0.0};
  out.total = weights.lambda1 * retrieval + weights.lambda2 * rationale + weights.lambda3 * stance +
              weights.gamma * rr;
  return out;
}

JointLoss joint_loss(const Var& retrieval, const Var& rationale, const Var& stance, const Var& rr,
                     const LossWeights& weights) {
  weights.validate();
  // Same association order as the scalar overload, so both totals agree bit for bit.
  auto total = add(add(add(scale(retrieval, weights.lambda1), scale(rationale, weights.lambda2)),
                       scale(stance, weights.lambda3)),
                   scale(rr, weights.gamma));
  return {total,
          joint_loss(retrieval.scalar(), rationale.scalar(), stance.scalar(), rr.scalar(), weights)};
}

}  // namespace arsjoint
