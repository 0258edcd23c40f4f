#include "arsjoint/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsjoint/data.hpp"
#include "arsjoint/errors.hpp"
#include "arsjoint/eval.hpp"
#include "arsjoint/retrieval.hpp"
#include "arsjoint/train.hpp"
#include "arsjoint/tune.hpp"

namespace arsjoint {

namespace {

struct Options {
  std::string corpus, claims, candidates, checkpoint, pred, gold, vocab, log, trial_log, best;
  TrainConfig train;
  int trials = 100;
};

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k-tra", o.train.k_tra, "Candidate abstracts per claim in training");
  cmd->add_option("--epochs", o.train.epochs, "Training epochs");
  cmd->add_option("--seed", o.train.seed, "Run seed");
  cmd->add_option("--lambda1", o.train.weights.lambda1, "Retrieval loss weight");
  cmd->add_option("--lambda2", o.train.weights.lambda2, "Rationale loss weight");
  cmd->add_option("--lambda3", o.train.weights.lambda3, "Stance loss weight");
  cmd->add_option("--gamma", o.train.weights.gamma, "Rationale regularisation weight (0 disables)");
  cmd->add_option("--lr1", o.train.lr_encoder, "Encoder learning rate");
  cmd->add_option("--lr2", o.train.lr_heads, "Head learning rate");
  cmd->add_option("--max-len", o.train.max_len, "Maximum input length in tokens");
  cmd->add_option("--dim", o.train.dim, "Hidden width");
  cmd->add_option("--layers", o.train.layers, "Encoder self-attention layers");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

CandidateMap candidates_for(const Options& o, const std::vector<Claim>& claims, const Corpus& corpus,
                            int k) {
  if (!o.candidates.empty()) {
    std::ifstream in(o.candidates);
    if (!in) throw ValidationError("cannot open " + o.candidates);
    return to_candidate_map(parse_candidate_lists(in));
  }
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);
  CandidateMap map;
  for (const auto& claim : claims) map[claim.claim_id] = index.topk(claim.claim_id, claim.text, k).doc_ids();
  return map;
}

void print_config(std::ostream& err, const std::string& command, const Options& o) {
  nlohmann::json j = {{"command", command}, {"train", nlohmann::json::parse(o.train.to_json())}};
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) j[key] = value;
  };
  put("corpus", o.corpus);
  put("claims", o.claims);
  put("candidates", o.candidates);
  put("checkpoint", o.checkpoint);
  put("pred", o.pred);
  put("gold", o.gold);
  put("vocab", o.vocab);
  put("log", o.log);
  put("trial_log", o.trial_log);
  put("best", o.best);
  if (command == "tune") j["trials"] = o.trials;
  err << "config " << j.dump() << '\n';
}

int do_ingest(const Options& o, std::ostream& out) {
  Corpus corpus(load_corpus(o.corpus));
  std::vector<Claim> claims;
  if (!o.claims.empty()) {
    claims = load_claims(o.claims);
    // Checks evidence documents and sentence indices against the corpus.
    build_instances(claims, corpus, {}, 1);
  }
  std::size_t sentences = 0;
  for (const auto& doc : corpus.documents()) sentences += doc.sentences.size();
  nlohmann::json summary = {{"documents", corpus.size()}, {"sentences", sentences}, {"claims", claims.size()}};
  if (!o.vocab.empty()) {
    const auto vocab = build_vocabulary(claims, corpus);
    auto file = open_out(o.vocab);
    vocab.write(file);
    summary["vocabulary"] = vocab.size();
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

int do_retrieve(const Options& o) {
  Corpus corpus(load_corpus(o.corpus));
  const auto claims = load_claims(o.claims);
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);
  std::vector<CandidateList> lists;
  for (const auto& claim : claims) lists.push_back(index.topk(claim.claim_id, claim.text, o.train.k_ret));
  auto file = open_out(o.candidates);
  write_candidate_lists(file, lists);
  return kExitOk;
}

int do_train(const Options& o, std::ostream& err) {
  Corpus corpus(load_corpus(o.corpus));
  const auto claims = load_claims(o.claims);
  const auto candidates = candidates_for(o, claims, corpus, o.train.k_tra);
  const auto instances = build_instances(claims, corpus, candidates, o.train.k_tra);
  if (instances.empty()) throw ValidationError("no training instances");
  std::optional<std::ofstream> log_file;
  if (!o.log.empty()) log_file = open_out(o.log);
  auto result = train(instances, claims, corpus, o.train, log_file ? &*log_file : &err);
  result.checkpoint.save(o.checkpoint);
  return kExitOk;
}

int do_predict(const Options& o) {
  Corpus corpus(load_corpus(o.corpus));
  const auto claims = load_claims(o.claims);
  const auto checkpoint = ModelCheckpoint::load(o.checkpoint);
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);
  std::vector<Prediction> predictions;
  for (const auto& claim : claims) {
    predictions.push_back(predict(checkpoint, claim, corpus, index, o.train.k_ret));
  }
  auto file = open_out(o.pred);
  write_predictions(file, predictions);
  return kExitOk;
}

int do_evaluate(const Options& o, std::ostream& out) {
  const auto gold = load_claims(o.gold);
  const auto predictions = load_predictions(o.pred);
  out << evaluate(predictions, gold).to_json() << '\n';
  return kExitOk;
}

int do_tune(const Options& o, std::ostream& out, std::ostream& err) {
  Corpus corpus(load_corpus(o.corpus));
  const auto claims = load_claims(o.claims);
  SearchSpec spec;
  spec.trials = o.trials;
  spec.seed = o.train.seed;
  const auto split = split_claims(claims, spec);
  const auto candidates = candidates_for(o, claims, corpus, std::max(o.train.k_tra, o.train.k_ret));
  const auto instances = build_instances(split.tune, corpus, candidates, o.train.k_tra);
  if (instances.empty()) throw ValidationError("tuning split has no instances");
  const auto vocab = build_vocabulary(claims, corpus);
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);

  auto train_fn = [&](const LossWeights& weights) {
    auto config = o.train;
    config.weights = weights;
    return train(instances, split.tune, corpus, config, vocab).checkpoint;
  };
  auto eval_fn = [&](const ModelCheckpoint& checkpoint) {
    std::vector<Prediction> predictions;
    for (const auto& claim : split.validation) {
      predictions.push_back(predict(checkpoint, claim, corpus, index, checkpoint.config.k_ret));
    }
    return tuning_objective(evaluate(predictions, split.validation));
  };
  const auto result = search(train_fn, eval_fn, spec);
  {
    auto file = open_out(o.trial_log);
    write_trial_log(file, result);
  }
  if (result.best_trial < 0) {
    err << "error: every tuning trial failed\n";
    return kExitValidation;
  }
  const auto best = best_weights_json(result, spec);
  if (!o.best.empty()) {
    auto file = open_out(o.best);
    file << best << '\n';
  }
  out << best << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint abstract retrieval, rationale selection and stance prediction", "arsjoint"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Validate corpus/claims files and optionally write a vocabulary");
  ingest->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  ingest->add_option("--claims", o.claims, "Claims JSONL");
  ingest->add_option("--vocab", o.vocab, "Write the vocabulary here");

  auto* retrieve = app.add_subcommand("retrieve", "Rank candidate abstracts per claim");
  retrieve->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  retrieve->add_option("--claims", o.claims, "Claims JSONL")->required();
  retrieve->add_option("--candidates", o.candidates, "Output candidate lists")->required();
  retrieve->add_option("--k-ret", o.train.k_ret, "Candidates per claim");

  auto* train_cmd = app.add_subcommand("train", "Train the joint model");
  train_cmd->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  train_cmd->add_option("--claims", o.claims, "Training claims JSONL")->required();
  train_cmd->add_option("--checkpoint", o.checkpoint, "Output checkpoint")->required();
  train_cmd->add_option("--candidates", o.candidates, "Candidate lists from `retrieve`");
  train_cmd->add_option("--log", o.log, "Epoch loss log (JSON lines); default stderr");
  add_model_flags(train_cmd, o);

  auto* predict_cmd = app.add_subcommand("predict", "Predict evidence for claims");
  predict_cmd->add_option("--checkpoint", o.checkpoint, "Trained checkpoint")->required();
  predict_cmd->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  predict_cmd->add_option("--claims", o.claims, "Claims JSONL")->required();
  predict_cmd->add_option("--pred", o.pred, "Output predictions")->required();
  predict_cmd->add_option("--k-ret", o.train.k_ret, "Candidates scored per claim");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold claims");
  evaluate_cmd->add_option("--gold", o.gold, "Gold claims JSONL")->required();
  evaluate_cmd->add_option("--pred", o.pred, "Predictions JSONL")->required();

  auto* tune = app.add_subcommand("tune", "Random search over the four loss weights");
  tune->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  tune->add_option("--claims", o.claims, "Training claims JSONL")->required();
  tune->add_option("--trial-log", o.trial_log, "Output trial log")->required();
  tune->add_option("--best", o.best, "Write the best weights here");
  tune->add_option("--candidates", o.candidates, "Candidate lists from `retrieve`");
  tune->add_option("--trials", o.trials, "Number of trials");
  tune->add_option("--k-ret", o.train.k_ret, "Candidates scored per validation claim");
  add_model_flags(tune, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  auto* cmd = app.get_subcommands().front();
  const auto name = cmd->get_name();
  try {
    o.train.validate();
    require(o.trials >= 1, "--trials must be at least 1");
  } catch (const ContractViolation& e) {
    err << "usage error: " << e.what() << '\n' << cmd->help();
    return kExitUsage;
  }
  print_config(err, name, o);
  try {
    if (name == "ingest") return do_ingest(o, out);
    if (name == "retrieve") return do_retrieve(o);
    if (name == "train") return do_train(o, err);
    if (name == "predict") return do_predict(o);
    if (name == "evaluate") return do_evaluate(o, out);
    if (name == "tune") return do_tune(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace arsjoint
