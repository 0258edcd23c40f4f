#include "arsjoint/attention.hpp"

#include <vector>

#include "arsjoint/errors.hpp"

namespace arsjoint {

void init_attention_parameters(ParameterMap& params, const std::string& prefix, int dim,
                               std::mt19937_64& rng) {
  params.add_uniform(prefix + ".w1", dim, dim, dim, rng);
  params.add_uniform(prefix + ".b1", 1, dim, dim, rng);
  params.add_uniform(prefix + ".w2", 1, dim, dim, rng);
  params.add_uniform(prefix + ".b2", 1, 1, dim, rng);
}

AttentionParams bind_attention(Tape& tape, ParameterMap& params, const std::string& prefix) {
  return {tape.parameter(params.at(prefix + ".w1")), tape.parameter(params.at(prefix + ".b1")),
          tape.parameter(params.at(prefix + ".w2")), tape.parameter(params.at(prefix + ".b2"))};
}

AttentionResult attend(const Var& units, const AttentionParams& params) {
  require(units.valid() && units.rows() >= 1, "attention over an empty input");
  const auto u = tanh(affine(units, params.w1, params.b1));
  const auto scores = affine(u, params.w2, params.b2);  // n x 1
  const auto alphas = softmax_rows(transpose(scores));  // 1 x n
  return {matmul(alphas, u), alphas};
}

AttentionResult word_attention(const Var& tokens, const AttentionParams& params) {
  return attend(tokens, params);
}

AttentionResult sentence_attention(const Var& sentence_vectors, const AttentionParams& params) {
  return attend(sentence_vectors, params);
}

HanResult han(const Var& title_tokens, std::span<const Var> sentence_tokens,
              const AttentionParams& word, const AttentionParams& sentence) {
  std::vector<Var> units;
  const bool has_title = title_tokens.valid() && title_tokens.rows() > 0;
  if (has_title) units.push_back(word_attention(title_tokens, word).pooled);
  for (const auto& tokens : sentence_tokens) units.push_back(word_attention(tokens, word).pooled);
  require(!units.empty(), "han: document has no units");
  const auto stacked = concat_rows(units);
  auto doc = sentence_attention(stacked, sentence);
  return {doc.pooled, doc.alphas, stacked, has_title};
}

}  // namespace arsjoint
