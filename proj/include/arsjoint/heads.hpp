#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "arsjoint/attention.hpp"

namespace arsjoint {

// Two affine layers with tanh in between: f(x) = tanh(x W1^T + b1) W2^T + b2.
struct MlpParams {
  Var w1, b1, w2, b2;
};

void init_mlp_parameters(ParameterMap& params, const std::string& prefix, int dim, int classes,
                         std::mt19937_64& rng);
MlpParams bind_mlp(Tape& tape, ParameterMap& params, const std::string& prefix);
Var mlp(const Var& x, const MlpParams& params);

// Parameters of all three heads bound to one tape. The rationale head's word
// attention also produces the sentence and claim vectors used by the stance head.
struct HeadParams {
  AttentionParams retrieval_word;   // attn.ret.word
  AttentionParams retrieval_sent;   // attn.ret.sent
  AttentionParams rationale_word;   // attn.rat.word
  AttentionParams stance_sent;      // attn.sta.sent
  MlpParams retrieval_mlp;          // mlp.ret (2 classes)
  MlpParams rationale_mlp;          // mlp.rat (2 classes)
  MlpParams stance_mlp;             // mlp.sta (3 classes)
};

void init_head_parameters(ParameterMap& params, int dim, std::mt19937_64& rng);
HeadParams bind_heads(Tape& tape, ParameterMap& params);

struct RetrievalOutput {
  Var p_b;     // 1 x 2
  Var alphas;  // 1 x units over title (when present) then sentences
  bool has_title = false;

  // Alphas of the abstract sentences only, title dropped without renormalising.
  Var sentence_alphas() const;
};

RetrievalOutput abstract_retrieval_head(const Var& claim_tokens, const Var& title_tokens,
                                        std::span<const Var> sentence_tokens, const HeadParams& params);

struct RationaleOutput {
  Var p_r;            // l x 2
  Var sentence_reps;  // l x d
};

RationaleOutput rationale_head(std::span<const Var> sentence_tokens, const HeadParams& params);

// {i : p_r[i][1] > p_r[i][0]}, possibly empty.
std::vector<int> estimated_rationales(const Matrix& p_r);

// Gold support set or estimated set; an empty result falls back to every sentence.
std::vector<int> select_rationales(const Matrix& p_r, std::span<const int> gold_y_r,
                                   bool use_estimated);

struct StanceOutput {
  Var p_e;     // 1 x 3
  Var alphas;  // 1 x |selected|
};

StanceOutput stance_head(const Var& claim_tokens, const Var& sentence_reps,
                         std::span<const int> selected, const HeadParams& params);

// sin(pi/2 * (current - 1) / (total - 1)) for 1 <= current <= total, total >= 2.
double sample_probability(int current_epoch, int total_epochs);

// Training-schedule variant: a single-epoch run uses estimated rationales throughout.
double schedule_probability(int current_epoch, int total_epochs);

}  // namespace arsjoint
