#pragma once

#include <span>

#include <Eigen/Core>

#include "arsjoint/autodiff.hpp"

namespace arsjoint {

// -log(clamp(p[y])) for a 1 x k probability row.
Var cross_entropy(const Var& p, int y);
// Mean over rows of -log(clamp(p_r[i][y_i])) for an l x 2 matrix.
Var rationale_cross_entropy(const Var& p_r, std::span<const int> labels);

// D(p||q) = -sum_i [p_i log q_i + (1 - p_i) log(1 - q_i)] with p and q clamped to [eps, 1-eps].
Var rr_divergence(const Var& p, const Var& q);
// D(alpha||y) + D(y||alpha)
Var rr_loss(const Var& alphas, const Var& rationale_probs);

double cross_entropy(const Eigen::VectorXd& p, int y);
double rr_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
double rr_loss(const Eigen::VectorXd& alphas, const Eigen::VectorXd& rationale_probs);

struct LossWeights {
  double lambda1 = 0.2;   // retrieval
  double lambda2 = 12.0;  // rationale
  double lambda3 = 1.1;   // stance
  double gamma = 1.9;     // rationale regularisation

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
  double retrieval = 0.0;
  double rationale = 0.0;
  double stance = 0.0;
  double rr = 0.0;
  double total = 0.0;
};

LossBreakdown joint_loss(double retrieval, double rationale, double stance, double rr,
                         const LossWeights& weights);

struct JointLoss {
  Var total;
  LossBreakdown breakdown;
};

JointLoss joint_loss(const Var& retrieval, const Var& rationale, const Var& stance, const Var& rr,
                     const LossWeights& weights);

}  // namespace arsjoint
