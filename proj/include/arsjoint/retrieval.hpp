#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arsjoint/data.hpp"

namespace arsjoint {

// Maps text to a fixed-width vector. Implementations must be deterministic.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

// L2-normalised hashed bag of words over lowercased alphanumeric tokens.
// Token t lands in bucket fnv1a64(t) % dim.
class HashedBowEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDim = 4096;

  explicit HashedBowEmbedder(std::size_t dim = kDefaultDim);

  std::string name() const override { return "hashed-bow"; }
  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(std::string_view text) const override;

  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dim_;
};

// Lowercased maximal runs of alphanumerics (bytes >= 0x80 count as word characters).
std::vector<std::string> word_tokens(std::string_view text);

std::vector<double> embed_text(const Embedder& embedder, std::string_view text);

// u.v / (|u| |v|), 0 when either norm is zero.
double cosine(std::span<const double> u, std::span<const double> v);

struct ScoredDoc {
  DocId doc_id = 0;
  double score = 0.0;
};

struct CandidateList {
  ClaimId claim_id = 0;
  std::vector<ScoredDoc> ranked;

  std::vector<DocId> doc_ids() const;
};

// Title and abstract joined with spaces; this is what gets embedded per document.
std::string document_text(const Document& doc);

// Precomputes document embeddings (stored sparse) so many claims can be ranked.
class RetrievalIndex {
 public:
  RetrievalIndex(const Corpus& corpus, const Embedder& embedder);

  // Top k by cosine, ties broken by ascending doc_id.
  CandidateList topk(ClaimId claim_id, std::string_view claim_text, int k) const;

 private:
  struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    double norm = 0.0;
  };

  const Embedder& embedder_;
  std::vector<DocId> doc_ids_;
  std::vector<SparseVector> vectors_;
};

CandidateList topk_candidates(const Claim& claim, const Corpus& corpus, const Embedder& embedder,
                              int k);

void write_candidate_lists(std::ostream& out, const std::vector<CandidateList>& lists);
std::vector<CandidateList> parse_candidate_lists(std::istream& in);
CandidateMap to_candidate_map(const std::vector<CandidateList>& lists);

}  // namespace arsjoint
