#include "arsjoint/model.hpp"

#include <random>

#include "arsjoint/errors.hpp"

namespace arsjoint {

ParameterMap init_model_parameters(const ModelShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParameterMap params;
  init_encoder_parameters(params, {shape.vocab_size, shape.dim, shape.layers}, rng);
  init_head_parameters(params, shape.dim, rng);
  return params;
}

namespace {

Eigen::VectorXd row_vector(const Var& v) { return v.value().row(0).transpose(); }

}  // namespace

HeadOutputs ForwardResult::values() const {
  return {row_vector(retrieval.p_b), rationale.p_r.value(), row_vector(stance.p_e),
          row_vector(retrieval.alphas), selected};
}

ForwardResult forward(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers,
                      std::span<const int> gold_y_r, bool use_estimated) {
  require(!input.sentences.empty(), "forward: abstract has no sentences");
  const auto heads = bind_heads(tape, params);
  auto encoded = encode(tape, params, input, layers);

  std::vector<Var> sentences;
  sentences.reserve(input.sentences.size());
  for (std::size_t i = 0; i < input.sentences.size(); ++i) sentences.push_back(encoded.sentence(i));
  const Var title = input.title.empty() ? Var() : encoded.title();
  const Var claim = encoded.claim();

  auto retrieval = abstract_retrieval_head(claim, title, sentences, heads);
  auto rationale = rationale_head(sentences, heads);
  auto selected = select_rationales(rationale.p_r.value(), gold_y_r, use_estimated);
  auto stance = stance_head(claim, rationale.sentence_reps, selected, heads);
  return {encoded, retrieval, rationale, stance, std::move(selected)};
}

InstanceLoss instance_loss(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers,
                           const LabeledInstance& instance, bool use_estimated,
                           const LossWeights& weights) {
  require(instance.y_r.size() == input.sentences.size(),
          "instance_loss: label vector does not match the abstract length");
  auto result = forward(tape, params, input, layers, instance.y_r, use_estimated);
  const auto l_ret = cross_entropy(result.retrieval.p_b, instance.y_b ? 1 : 0);
  const auto l_rat = rationale_cross_entropy(result.rationale.p_r, instance.y_r);
  const auto l_sta = cross_entropy(result.stance.p_e, static_cast<int>(instance.y_e));
  const auto l_rr = rr_loss(result.retrieval.sentence_alphas(),
                            transpose(column(result.rationale.p_r, 1)));
  auto loss = joint_loss(l_ret, l_rat, l_sta, l_rr, weights);
  return {std::move(result), std::move(loss)};
}

}  // namespace arsjoint
