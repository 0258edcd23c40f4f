#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arsjoint {

using DocId = std::int64_t;
using ClaimId = std::int64_t;

enum class Stance : int { kSupport = 0, kRefute = 1, kNoInfo = 2 };

inline constexpr int kStanceCount = 3;

// SciFact spelling: SUPPORT / CONTRADICT / NOINFO.
std::string_view stance_name(Stance stance);
// Accepts SUPPORT, CONTRADICT, REFUTE and (when allow_noinfo) NOINFO / NOT_ENOUGH_INFO.
std::optional<Stance> parse_stance(std::string_view text, bool allow_noinfo);

struct Document {
  DocId doc_id = 0;
  std::string title;
  std::vector<std::string> sentences;

  bool operator==(const Document&) const = default;
};

struct EvidenceSet {
  std::vector<std::vector<int>> rationale_groups;
  Stance stance = Stance::kSupport;

  // Union of all groups, ascending.
  std::vector<int> rationale_sentences() const;

  bool operator==(const EvidenceSet&) const = default;
};

struct Claim {
  ClaimId claim_id = 0;
  std::string text;
  std::vector<DocId> cited_doc_ids;
  std::map<DocId, EvidenceSet> evidence;

  bool operator==(const Claim&) const = default;
};

struct LabeledInstance {
  ClaimId claim_id = 0;
  DocId doc_id = 0;
  bool y_b = false;
  std::vector<int> y_r;
  Stance y_e = Stance::kNoInfo;

  // Throws ValidationError when the label combination is inconsistent.
  void validate() const;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  const Document* find(DocId doc_id) const;
  const Document& at(DocId doc_id) const;

 private:
  std::vector<Document> documents_;
  std::map<DocId, std::size_t> index_;
};

// Ranked candidate documents per claim, as produced by retrieval.
using CandidateMap = std::map<ClaimId, std::vector<DocId>>;

std::vector<Document> parse_corpus(std::istream& in);
std::vector<Document> load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const std::vector<Document>& documents);

std::vector<Claim> parse_claims(std::istream& in);
std::vector<Claim> load_claims(const std::filesystem::path& path);
void write_claims(std::ostream& out, const std::vector<Claim>& claims);

// One instance per document in (gold evidence docs ∪ ranked candidates), at most
// max(k_tra, |gold|) per claim. Gold docs are always kept; the lowest-ranked
// non-gold candidates are dropped first.
std::vector<LabeledInstance> build_instances(const std::vector<Claim>& claims, const Corpus& corpus,
                                             const CandidateMap& candidates, int k_tra);

}  // namespace arsjoint
