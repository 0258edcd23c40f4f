#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "arsjoint/data.hpp"
#include "arsjoint/encoder.hpp"
#include "arsjoint/heads.hpp"
#include "arsjoint/loss.hpp"

namespace arsjoint {

struct ModelShape {
  int vocab_size = 0;
  int dim = 64;
  int layers = 2;
};

// Encoder plus all head parameters, seeded uniform initialisation.
ParameterMap init_model_parameters(const ModelShape& shape, std::uint64_t seed);

// Plain-value snapshot of one forward pass.
struct HeadOutputs {
  Eigen::VectorXd p_b;               // 2
  Matrix p_r;                        // l x 2
  Eigen::VectorXd p_e;               // 3
  Eigen::VectorXd retrieval_alphas;  // title (if any) then sentences
  std::vector<int> selected;         // S^r fed to the stance head
};

struct ForwardResult {
  EncodedSequence encoded;
  RetrievalOutput retrieval;
  RationaleOutput rationale;
  StanceOutput stance;
  std::vector<int> selected;

  HeadOutputs values() const;
};

// Runs the encoder and all three heads. The stance head reads gold rationales
// unless use_estimated is set (then p_r decides); see select_rationales.
ForwardResult forward(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers,
                      std::span<const int> gold_y_r, bool use_estimated);

struct InstanceLoss {
  ForwardResult forward;
  JointLoss loss;
};

InstanceLoss instance_loss(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers,
                           const LabeledInstance& instance, bool use_estimated,
                           const LossWeights& weights);

}  // namespace arsjoint
