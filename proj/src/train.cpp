#include "arsjoint/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "arsjoint/errors.hpp"

namespace arsjoint {

using nlohmann::json;

void TrainConfig::validate() const {
  weights.validate();
  require(lr_encoder >= 0 && lr_heads >= 0, "learning rates must be non-negative");
  require(epochs >= 1, "epochs must be at least 1");
  require(k_tra >= 1 && k_ret >= 1, "k_tra and k_ret must be at least 1");
  require(max_len >= 4, "max_len too small");
  require(dim >= 1 && layers >= 0, "bad model shape");
}

std::string TrainConfig::to_json() const {
  json j = {{"lambda1", weights.lambda1}, {"lambda2", weights.lambda2}, {"lambda3", weights.lambda3},
            {"gamma", weights.gamma},     {"lr1", lr_encoder},          {"lr2", lr_heads},
            {"epochs", epochs},           {"k_tra", k_tra},             {"k_ret", k_ret},
            {"max_len", max_len},         {"dim", dim},                 {"layers", layers},
            {"seed", seed},               {"batch_size", 1},            {"dropout", 0.0}};
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  const auto j = json::parse(text);
  TrainConfig c;
  c.weights = {j.at("lambda1").get<double>(), j.at("lambda2").get<double>(),
               j.at("lambda3").get<double>(), j.at("gamma").get<double>()};
  c.lr_encoder = j.at("lr1").get<double>();
  c.lr_heads = j.at("lr2").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.k_tra = j.at("k_tra").get<int>();
  c.k_ret = j.at("k_ret").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dim = j.at("dim").get<int>();
  c.layers = j.at("layers").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

Adam::Adam(double lr_encoder, double lr_heads, double beta1, double beta2, double epsilon)
    : lr_encoder_(lr_encoder), lr_heads_(lr_heads), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(ParameterMap& params) {
  ++step_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (auto& [path, p] : params) {
    auto [it, fresh] = moments_.try_emplace(path);
    auto& state = it->second;
    if (fresh) {
      state.m = Matrix::Zero(p.value.rows(), p.value.cols());
      state.v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    const double lr = path.rfind("enc.", 0) == 0 ? lr_encoder_ : lr_heads_;
    double* value = p.value.data();
    double* m = state.m.data();
    double* v = state.v.data();
    const double* g = p.grad.data();
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      if (g[i] == 0.0) continue;
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      value[i] -= lr * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + epsilon_);
    }
  }
}

namespace {

constexpr char kCheckpointMagic[8] = {'A', 'R', 'S', 'J', 'C', 'K', 'P', 'T'};

void put_u64(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ValidationError("checkpoint truncated");
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void ModelCheckpoint::write(std::ostream& out) const {
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(vocab.size()));
  for (int i = 0; i < vocab.size(); ++i) tokens.push_back(vocab.token(i));
  const json header = {{"config", json::parse(config.to_json())}, {"vocab", tokens}};
  const auto text = header.dump();
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u64(out, version);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_parameters(out, params);
}

ModelCheckpoint ModelCheckpoint::read(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ValidationError("not a checkpoint file (bad magic)");
  }
  ModelCheckpoint checkpoint;
  checkpoint.version = static_cast<std::uint32_t>(get_u64(in));
  if (checkpoint.version != kFormatVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(checkpoint.version));
  }
  std::string text(get_u64(in), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw ValidationError("checkpoint truncated");
  }
  const auto header = json::parse(text);
  checkpoint.config = TrainConfig::from_json(header.at("config").dump());
  std::string vocab_text;
  for (const auto& token : header.at("vocab")) vocab_text += token.get<std::string>() + "\n";
  std::istringstream vocab_in(vocab_text);
  checkpoint.vocab = Vocabulary::read(vocab_in);
  checkpoint.params = read_parameters(in);
  return checkpoint;
}

void ModelCheckpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write(out);
}

ModelCheckpoint ModelCheckpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read(in);
}

std::string to_json_line(const EpochLog& log) {
  const json j = {{"epoch", log.epoch},
                  {"p_sample", log.p_sample},
                  {"estimated", log.estimated_count},
                  {"L_ret", log.mean.retrieval},
                  {"L_rat", log.mean.rationale},
                  {"L_sta", log.mean.stance},
                  {"L_RR", log.mean.rr},
                  {"L_total", log.mean.total}};
  return j.dump();
}

Vocabulary build_vocabulary(const std::vector<Claim>& claims, const Corpus& corpus) {
  std::vector<std::string> texts;
  for (const auto& claim : claims) texts.push_back(claim.text);
  for (const auto& doc : corpus.documents()) {
    texts.push_back(doc.title);
    texts.insert(texts.end(), doc.sentences.begin(), doc.sentences.end());
  }
  return Vocabulary::build(texts);
}

double sampling_draw(std::uint64_t seed, int epoch, std::size_t instance_index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(epoch));
  h = splitmix64(h ^ static_cast<std::uint64_t>(instance_index));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

TrainResult train(const std::vector<LabeledInstance>& instances, const std::vector<Claim>& claims,
                  const Corpus& corpus, const TrainConfig& config, std::ostream* log) {
  return train(instances, claims, corpus, config, build_vocabulary(claims, corpus), log);
}

TrainResult train(const std::vector<LabeledInstance>& instances, const std::vector<Claim>& claims,
                  const Corpus& corpus, const TrainConfig& config, Vocabulary vocab,
                  std::ostream* log) {
  require(!instances.empty(), "train: no instances");
  config.validate();

  std::map<ClaimId, const Claim*> claim_by_id;
  for (const auto& claim : claims) claim_by_id[claim.claim_id] = &claim;

  std::vector<TokenizedSequence> inputs;
  inputs.reserve(instances.size());
  for (const auto& instance : instances) {
    instance.validate();
    auto it = claim_by_id.find(instance.claim_id);
    if (it == claim_by_id.end()) {
      throw ValidationError("instance references unknown claim " + std::to_string(instance.claim_id));
    }
    const auto& doc = corpus.at(instance.doc_id);
    inputs.push_back(build_input(vocab, it->second->text, doc.title, doc.sentences, config.max_len));
  }

  TrainResult result;
  result.checkpoint.config = config;
  result.checkpoint.params =
      init_model_parameters({vocab.size(), config.dim, config.layers}, config.seed);
  result.checkpoint.vocab = std::move(vocab);
  auto& params = result.checkpoint.params;

  Adam optimizer(config.lr_encoder, config.lr_heads);
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog epoch_log;
    epoch_log.epoch = epoch;
    epoch_log.p_sample = schedule_probability(epoch, config.epochs);
    std::mt19937_64 shuffler(splitmix64(config.seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(epoch))));
    std::shuffle(order.begin(), order.end(), shuffler);

    LossBreakdown totals;
    for (std::size_t idx : order) {
      const auto& instance = instances[idx];
      const bool use_estimated = sampling_draw(config.seed, epoch, idx) < epoch_log.p_sample;
      epoch_log.estimated_count += use_estimated ? 1 : 0;

      params.zero_grad();
      Tape tape;
      auto step = instance_loss(tape, params, inputs[idx], config.layers, instance, use_estimated,
                                config.weights);
      const auto& b = step.loss.breakdown;
      if (!std::isfinite(b.total)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " for claim " +
                            std::to_string(instance.claim_id) + ", doc " +
                            std::to_string(instance.doc_id));
      }
      tape.backward(step.loss.total);
      optimizer.step(params);

      totals.retrieval += b.retrieval;
      totals.rationale += b.rationale;
      totals.stance += b.stance;
      totals.rr += b.rr;
      totals.total += b.total;
    }
    const double n = static_cast<double>(instances.size());
    epoch_log.mean = {totals.retrieval / n, totals.rationale / n, totals.stance / n, totals.rr / n,
                      totals.total / n};
    if (log != nullptr) *log << to_json_line(epoch_log) << '\n';
    result.history.push_back(epoch_log);
  }
  params.zero_grad();
  return result;
}

AbstractPrediction predict_abstract(const ModelCheckpoint& checkpoint, std::string_view claim_text,
                                    const Document& doc) {
  const auto& config = checkpoint.config;
  const auto input =
      build_input(checkpoint.vocab, claim_text, doc.title, doc.sentences, config.max_len);
  // A non-recording tape never writes to parameters.
  auto& params = const_cast<ParameterMap&>(checkpoint.params);
  Tape tape(false);
  const std::vector<int> no_gold(doc.sentences.size(), 0);
  const auto result = forward(tape, params, input, config.layers, no_gold, /*use_estimated=*/true);
  const auto values = result.values();

  AbstractPrediction out;
  out.doc_id = doc.doc_id;
  out.relevance = values.p_b[1];
  out.relevant = values.p_b[1] > values.p_b[0];
  out.rationale_indices = estimated_rationales(values.p_r);
  Eigen::Index best = 0;
  values.p_e.maxCoeff(&best);
  out.stance = static_cast<Stance>(best);
  return out;
}

Prediction predict(const ModelCheckpoint& checkpoint, const Claim& claim, const Corpus& corpus,
                   const RetrievalIndex& index, int k_ret) {
  Prediction prediction;
  prediction.claim_id = claim.claim_id;
  if (corpus.empty()) return prediction;
  const auto candidates = index.topk(claim.claim_id, claim.text, k_ret);
  for (const auto& scored : candidates.ranked) {
    prediction.abstracts.push_back(predict_abstract(checkpoint, claim.text, corpus.at(scored.doc_id)));
  }
  return prediction;
}

Prediction predict(const ModelCheckpoint& checkpoint, const Claim& claim, const Corpus& corpus,
                   const Embedder& embedder, int k_ret) {
  return predict(checkpoint, claim, corpus, RetrievalIndex(corpus, embedder), k_ret);
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& prediction : predictions) {
    json evidence = json::object();
    for (const auto& abstract : prediction.abstracts) {
      if (!abstract.reported()) continue;
      evidence[std::to_string(abstract.doc_id)] = {{"sentences", abstract.rationale_indices},
                                                   {"label", stance_name(abstract.stance)}};
    }
    out << json({{"id", prediction.claim_id}, {"evidence", std::move(evidence)}}).dump() << '\n';
  }
}

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> predictions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto record = json::parse(line);
      Prediction prediction;
      prediction.claim_id = record.at("id").get<ClaimId>();
      if (auto it = record.find("evidence"); it != record.end() && !it->is_null()) {
        for (const auto& [key, entry] : it->items()) {
          AbstractPrediction abstract;
          abstract.doc_id = std::stoll(key);
          abstract.relevant = true;
          abstract.rationale_indices = entry.at("sentences").get<std::vector<int>>();
          const auto label = entry.at("label").get<std::string>();
          const auto stance = parse_stance(label, /*allow_noinfo=*/true);
          if (!stance) throw ParseError(line_no, "invalid label '" + label + "'");
          abstract.stance = *stance;
          prediction.abstracts.push_back(std::move(abstract));
        }
      }
      predictions.push_back(std::move(prediction));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const std::logic_error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return predictions;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_predictions(in);
}

}  // namespace arsjoint
