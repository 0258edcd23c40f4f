#pragma once

#include <random>
#include <span>
#include <string>

#include "arsjoint/autodiff.hpp"

namespace arsjoint {

// Affine pair of one attention level, bound to a tape:
//   u_j = tanh(W1 h_j + b1), score_j = w2 . u_j + b2, alpha = softmax(score)
struct AttentionParams {
  Var w1;  // d x d
  Var b1;  // 1 x d
  Var w2;  // 1 x d
  Var b2;  // 1 x 1
};

// Registers <prefix>.{w1,b1,w2,b2}; prefix follows attn.<head>.<level>.
void init_attention_parameters(ParameterMap& params, const std::string& prefix, int dim,
                               std::mt19937_64& rng);
AttentionParams bind_attention(Tape& tape, ParameterMap& params, const std::string& prefix);

struct AttentionResult {
  Var pooled;  // 1 x d, sum_i u_i alpha_i
  Var alphas;  // 1 x n
};

// Pools the rows of `units` (n x d, n >= 1). Word-level and sentence-level
// attention share this form and differ only in their parameters.
AttentionResult attend(const Var& units, const AttentionParams& params);
AttentionResult word_attention(const Var& tokens, const AttentionParams& params);
AttentionResult sentence_attention(const Var& sentence_vectors, const AttentionParams& params);

struct HanResult {
  Var pooled;       // 1 x d document vector
  Var alphas;       // 1 x units, title first when present
  Var unit_vectors; // units x d, word-attention output per unit
  bool has_title = false;
};

// Word attention inside each unit, then sentence attention across units.
// `title_tokens` may be an unbound Var or have zero rows when there is no title.
HanResult han(const Var& title_tokens, std::span<const Var> sentence_tokens,
              const AttentionParams& word, const AttentionParams& sentence);

}  // namespace arsjoint
