#pragma once

// Straight-line reimplementations used to cross-check the library. None of
// these call into the code they are checking.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "arsjoint/data.hpp"
#include "arsjoint/parameters.hpp"
#include "arsjoint/retrieval.hpp"
#include "arsjoint/train.hpp"

namespace arsjoint::testing {

struct RefAttention {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;

  static RefAttention from(const ParameterMap& params, const std::string& prefix);
};

struct RefPooled {
  Eigen::VectorXd pooled;
  Eigen::VectorXd alphas;
};

// units: one row per unit.
RefPooled ref_attend(const Eigen::MatrixXd& units, const RefAttention& p);

struct RefMlp {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;

  static RefMlp from(const ParameterMap& params, const std::string& prefix);
  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;
};

struct RefHan {
  Eigen::VectorXd pooled;
  Eigen::VectorXd alphas;
};

// An empty title matrix means no title unit.
RefHan ref_han(const Eigen::MatrixXd& title, const std::vector<Eigen::MatrixXd>& sentences,
               const RefAttention& word, const RefAttention& sentence);

struct RefHeads {
  Eigen::VectorXd p_b;
  Eigen::VectorXd retrieval_alphas;
  Eigen::MatrixXd p_r;
  Eigen::VectorXd p_e;
};

RefHeads ref_heads(const ParameterMap& params, const Eigen::MatrixXd& claim, const Eigen::MatrixXd& title,
                   const std::vector<Eigen::MatrixXd>& sentences, const std::vector<int>& selected);

// Full sort of every document by cosine, ties by doc_id, cut to k.
std::vector<ScoredDoc> brute_force_topk(const std::vector<Document>& documents, const std::string& claim,
                                        const Embedder& embedder, int k);

struct BruteCounts {
  long correct = 0;
  long predicted = 0;
  long gold = 0;
};

struct BruteReport {
  BruteCounts selection_only, selection_label, label_only, label_rationale;
};

// Scores predictions with nested loops over claims, abstracts, sentences and groups.
BruteReport brute_force_score(const std::vector<Prediction>& predictions, const std::vector<Claim>& gold);

}  // namespace arsjoint::testing
