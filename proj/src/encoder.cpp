#include "arsjoint/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace arsjoint {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c) != 0) {
      word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (std::isspace(c) != 0) {
      flush();
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  add("[UNK]");
  add("[CLS]");
  add("[SEP]");
}

void Vocabulary::add(std::string token) {
  const int id = static_cast<int>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw ValidationError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, int min_count) {
  std::map<std::string, int> counts;
  for (const auto& text : texts) {
    for (auto& token : tokenize(text)) ++counts[std::move(token)];
  }
  std::vector<std::pair<std::string, int>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (auto& [token, count] : ordered) {
    if (count >= min_count && vocab.ids_.count(token) == 0) vocab.add(token);
  }
  return vocab;
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.ids_.clear();
  std::string line;
  while (std::getline(in, line)) vocab.add(line);
  if (vocab.size() < 3 || vocab.tokens_[kUnk] != "[UNK]" || vocab.tokens_[kCls] != "[CLS]" ||
      vocab.tokens_[kSep] != "[SEP]") {
    throw ValidationError("vocabulary must start with [UNK], [CLS], [SEP]");
  }
  return vocab;
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& token : tokens_) out << token << '\n';
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& token : tokenize(text)) ids.push_back(id(token));
  return ids;
}

int TokenizedSequence::marker_count() const {
  return 2 + (title.empty() ? 0 : 1) + static_cast<int>(sentences.size());
}

TokenizedSequence build_input(const std::vector<int>& claim, const std::vector<int>& title,
                              const std::vector<std::vector<int>>& sentences, int max_len) {
  require(!claim.empty(), "build_input: claim has no tokens");
  const bool has_title = !title.empty();
  const int markers = 2 + (has_title ? 1 : 0) + static_cast<int>(sentences.size());
  const int floor = static_cast<int>(claim.size()) + markers + (has_title ? 1 : 0) +
                    static_cast<int>(sentences.size());
  if (floor > max_len) {
    throw InputTooLong("claim of " + std::to_string(claim.size()) + " tokens plus " +
                       std::to_string(sentences.size()) + " sentences cannot fit in max_len " +
                       std::to_string(max_len));
  }

  // Unit 0 is the title, units 1..l the sentences.
  std::vector<int> lengths;
  lengths.push_back(static_cast<int>(title.size()));
  for (const auto& s : sentences) {
    require(!s.empty(), "build_input: sentence has no tokens");
    lengths.push_back(static_cast<int>(s.size()));
  }
  int total = static_cast<int>(claim.size()) + markers;
  for (int n : lengths) total += n;
  while (total > max_len) {
    const auto longest = std::max_element(lengths.begin(), lengths.end());
    --*longest;
    --total;
  }

  TokenizedSequence seq;
  seq.tokens.reserve(static_cast<std::size_t>(total));
  seq.tokens.push_back(Vocabulary::kCls);
  seq.claim.begin = seq.size();
  seq.tokens.insert(seq.tokens.end(), claim.begin(), claim.end());
  seq.claim.end = seq.size();
  seq.tokens.push_back(Vocabulary::kSep);
  seq.title.begin = seq.title.end = seq.size();
  if (has_title) {
    seq.tokens.insert(seq.tokens.end(), title.begin(), title.begin() + lengths[0]);
    seq.title.end = seq.size();
    seq.tokens.push_back(Vocabulary::kSep);
  }
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Span span;
    span.begin = seq.size();
    seq.tokens.insert(seq.tokens.end(), sentences[i].begin(), sentences[i].begin() + lengths[i + 1]);
    span.end = seq.size();
    seq.tokens.push_back(Vocabulary::kSep);
    seq.sentences.push_back(span);
  }
  return seq;
}

TokenizedSequence build_input(const Vocabulary& vocab, std::string_view claim_text,
                              std::string_view title_text, const std::vector<std::string>& sentences,
                              int max_len) {
  std::vector<std::vector<int>> sentence_ids;
  sentence_ids.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto ids = vocab.encode(s);
    // Whitespace-free text always yields a token; guard against pure-space input anyway.
    if (ids.empty()) ids.push_back(Vocabulary::kUnk);
    sentence_ids.push_back(std::move(ids));
  }
  return build_input(vocab.encode(claim_text), vocab.encode(title_text), sentence_ids, max_len);
}

namespace {

std::string layer_path(int layer, const char* name) {
  return "enc.layer" + std::to_string(layer) + "." + name;
}

}  // namespace

void init_encoder_parameters(ParameterMap& params, const EncoderConfig& config, std::mt19937_64& rng) {
  require(config.vocab_size >= 3 && config.dim >= 1 && config.layers >= 0, "bad encoder config");
  const auto d = config.dim;
  // A lookup reads one row of a one-hot product, so its fan-in is 1.
  params.add_uniform("enc.embed", config.vocab_size, d, 1, rng);
  for (int l = 0; l < config.layers; ++l) {
    params.add_uniform(layer_path(l, "wq"), d, d, d, rng);
    params.add_uniform(layer_path(l, "wk"), d, d, d, rng);
    params.add_uniform(layer_path(l, "wv"), d, d, d, rng);
    params.add_uniform(layer_path(l, "ff.w"), d, d, d, rng);
    params.add_uniform(layer_path(l, "ff.b"), 1, d, d, rng);
  }
}

Var EncodedSequence::rows(const Span& span) const { return slice_rows(hidden, span.begin, span.end); }

EncodedSequence encode(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers) {
  require(!input.tokens.empty(), "encode: empty sequence");
  auto& table = params.at("enc.embed");
  std::vector<int> ids(input.tokens);
  for (int& id : ids) {
    if (id < 0 || id >= table.value.rows()) id = Vocabulary::kUnk;
  }
  Var x = tape.embedding(table, ids);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  for (int l = 0; l < layers; ++l) {
    const auto wq = tape.parameter(params.at(layer_path(l, "wq")));
    const auto wk = tape.parameter(params.at(layer_path(l, "wk")));
    const auto wv = tape.parameter(params.at(layer_path(l, "wv")));
    const auto q = matmul_nt(x, wq);
    const auto k = matmul_nt(x, wk);
    const auto v = matmul_nt(x, wv);
    const auto weights = softmax_rows(scale(matmul_nt(q, k), inv_sqrt_d));
    x = add(x, matmul(weights, v));
    const auto ff = tanh(affine(x, tape.parameter(params.at(layer_path(l, "ff.w"))),
                                tape.parameter(params.at(layer_path(l, "ff.b")))));
    x = add(x, ff);
  }
  return {x, &input};
}

}  // namespace arsjoint
