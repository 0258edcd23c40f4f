#include "arsjoint/heads.hpp"

#include <cmath>
#include <numbers>

#include "arsjoint/errors.hpp"

namespace arsjoint {

void init_mlp_parameters(ParameterMap& params, const std::string& prefix, int dim, int classes,
                         std::mt19937_64& rng) {
  params.add_uniform(prefix + ".w1", dim, dim, dim, rng);
  params.add_uniform(prefix + ".b1", 1, dim, dim, rng);
  params.add_uniform(prefix + ".w2", classes, dim, dim, rng);
  params.add_uniform(prefix + ".b2", 1, classes, dim, rng);
}

MlpParams bind_mlp(Tape& tape, ParameterMap& params, const std::string& prefix) {
  return {tape.parameter(params.at(prefix + ".w1")), tape.parameter(params.at(prefix + ".b1")),
          tape.parameter(params.at(prefix + ".w2")), tape.parameter(params.at(prefix + ".b2"))};
}

Var mlp(const Var& x, const MlpParams& params) {
  return affine(tanh(affine(x, params.w1, params.b1)), params.w2, params.b2);
}

void init_head_parameters(ParameterMap& params, int dim, std::mt19937_64& rng) {
  init_attention_parameters(params, "attn.ret.word", dim, rng);
  init_attention_parameters(params, "attn.ret.sent", dim, rng);
  init_attention_parameters(params, "attn.rat.word", dim, rng);
  init_attention_parameters(params, "attn.sta.sent", dim, rng);
  init_mlp_parameters(params, "mlp.ret", dim, 2, rng);
  init_mlp_parameters(params, "mlp.rat", dim, 2, rng);
  init_mlp_parameters(params, "mlp.sta", dim, 3, rng);
}

HeadParams bind_heads(Tape& tape, ParameterMap& params) {
  return {bind_attention(tape, params, "attn.ret.word"), bind_attention(tape, params, "attn.ret.sent"),
          bind_attention(tape, params, "attn.rat.word"), bind_attention(tape, params, "attn.sta.sent"),
          bind_mlp(tape, params, "mlp.ret"),            bind_mlp(tape, params, "mlp.rat"),
          bind_mlp(tape, params, "mlp.sta")};
}

Var RetrievalOutput::sentence_alphas() const {
  if (!has_title) return alphas;
  return transpose(slice_rows(transpose(alphas), 1, alphas.cols()));
}

RetrievalOutput abstract_retrieval_head(const Var& claim_tokens, const Var& title_tokens,
                                        std::span<const Var> sentence_tokens, const HeadParams& params) {
  const auto doc = han(title_tokens, sentence_tokens, params.retrieval_word, params.retrieval_sent);
  const auto claim = word_attention(claim_tokens, params.retrieval_word).pooled;
  const auto p_b = softmax_rows(mlp(hadamard(claim, doc.pooled), params.retrieval_mlp));
  return {p_b, doc.alphas, doc.has_title};
}

RationaleOutput rationale_head(std::span<const Var> sentence_tokens, const HeadParams& params) {
  require(!sentence_tokens.empty(), "rationale_head: abstract has no sentences");
  std::vector<Var> reps;
  reps.reserve(sentence_tokens.size());
  for (const auto& tokens : sentence_tokens) {
    reps.push_back(word_attention(tokens, params.rationale_word).pooled);
  }
  const auto stacked = concat_rows(reps);
  return {softmax_rows(mlp(stacked, params.rationale_mlp)), stacked};
}

std::vector<int> estimated_rationales(const Matrix& p_r) {
  require(p_r.cols() == 2, "p_r must have two columns");
  std::vector<int> selected;
  for (Eigen::Index i = 0; i < p_r.rows(); ++i) {
    if (p_r(i, 1) > p_r(i, 0)) selected.push_back(static_cast<int>(i));
  }
  return selected;
}

std::vector<int> select_rationales(const Matrix& p_r, std::span<const int> gold_y_r,
                                   bool use_estimated) {
  require(static_cast<Eigen::Index>(gold_y_r.size()) == p_r.rows(),
          "select_rationales: gold labels and p_r differ in length");
  std::vector<int> selected;
  if (use_estimated) {
    selected = estimated_rationales(p_r);
  } else {
    for (std::size_t i = 0; i < gold_y_r.size(); ++i) {
      if (gold_y_r[i] == 1) selected.push_back(static_cast<int>(i));
    }
  }
  if (selected.empty()) {
    for (Eigen::Index i = 0; i < p_r.rows(); ++i) selected.push_back(static_cast<int>(i));
  }
  return selected;
}

StanceOutput stance_head(const Var& claim_tokens, const Var& sentence_reps,
                         std::span<const int> selected, const HeadParams& params) {
  require(!selected.empty(), "stance_head: no selected sentences");
  const auto chosen = gather_rows(sentence_reps, selected);
  const auto evidence = sentence_attention(chosen, params.stance_sent);
  const auto claim = word_attention(claim_tokens, params.rationale_word).pooled;
  return {softmax_rows(mlp(hadamard(claim, evidence.pooled), params.stance_mlp)), evidence.alphas};
}

double sample_probability(int current_epoch, int total_epochs) {
  require(total_epochs >= 2, "sample_probability: total_epochs must be at least 2");
  require(current_epoch >= 1 && current_epoch <= total_epochs,
          "sample_probability: current_epoch out of range");
  const double progress =
      static_cast<double>(current_epoch - 1) / static_cast<double>(total_epochs - 1);
  return std::sin(std::numbers::pi / 2.0 * progress);
}

double schedule_probability(int current_epoch, int total_epochs) {
  if (total_epochs == 1 && current_epoch == 1) return 1.0;
  return sample_probability(current_epoch, total_epochs);
}

}  // namespace arsjoint
