#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arsjoint/autodiff.hpp"
#include "arsjoint/errors.hpp"

namespace arsjoint {

class InputTooLong : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Lowercased alphanumeric runs; every other non-space byte is its own token.
std::vector<std::string> tokenize(std::string_view text);

// Token-per-line file; the line number is the id. Ids 0..2 are reserved.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kCls = 1;
  static constexpr int kSep = 2;

  Vocabulary();

  // Tokens ordered by descending frequency, then lexicographically.
  static Vocabulary build(const std::vector<std::string>& texts, int min_count = 1);
  static Vocabulary read(std::istream& in);
  void write(std::ostream& out) const;

  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  std::vector<int> encode(std::string_view text) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct Span {
  int begin = 0;
  int end = 0;  // half-open
  int size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

// [CLS] claim [SEP] title [SEP] s_1 [SEP] ... s_l [SEP]; the title and its
// separator are omitted when the title has no tokens.
struct TokenizedSequence {
  std::vector<int> tokens;
  Span claim;
  Span title;
  std::vector<Span> sentences;

  int size() const { return static_cast<int>(tokens.size()); }
  int marker_count() const;
};

// Tail-truncates: while the sequence exceeds max_len, drop the last token of
// the currently longest title/abstract span (ties go to the earlier span).
// The claim is never truncated. Throws InputTooLong when the claim, markers
// and one token per title/sentence already exceed max_len.
TokenizedSequence build_input(const std::vector<int>& claim, const std::vector<int>& title,
                              const std::vector<std::vector<int>>& sentences, int max_len);
TokenizedSequence build_input(const Vocabulary& vocab, std::string_view claim_text,
                              std::string_view title_text, const std::vector<std::string>& sentences,
                              int max_len);

struct EncoderConfig {
  int vocab_size = 0;
  int dim = 64;
  int layers = 2;
};

// Registers enc.embed and enc.layer<i>.{wq,wk,wv,ff.w,ff.b}.
void init_encoder_parameters(ParameterMap& params, const EncoderConfig& config, std::mt19937_64& rng);

struct EncodedSequence {
  Var hidden;  // one row per token
  const TokenizedSequence* input = nullptr;

  Var rows(const Span& span) const;
  Var claim() const { return rows(input->claim); }
  Var title() const { return rows(input->title); }
  Var sentence(std::size_t i) const { return rows(input->sentences.at(i)); }
};

// Token embedding followed by `layers` blocks of single-head scaled
// dot-product self-attention and a tanh feed-forward, each with a residual.
// Out-of-vocabulary ids are read as UNK.
EncodedSequence encode(Tape& tape, ParameterMap& params, const TokenizedSequence& input, int layers);

}  // namespace arsjoint
