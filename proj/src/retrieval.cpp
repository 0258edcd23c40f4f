#include "arsjoint/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "arsjoint/errors.hpp"

namespace arsjoint {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

HashedBowEmbedder::HashedBowEmbedder(std::size_t dim) : dim_(dim) {
  require(dim > 0, "embedding dimension must be positive");
}

std::size_t HashedBowEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(fnv1a64(token) % dim_);
}

std::vector<double> HashedBowEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  for (const auto& token : word_tokens(text)) v[bucket(token)] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<double> embed_text(const Embedder& embedder, std::string_view text) {
  auto v = embedder.embed(text);
  if (v.size() != embedder.dim()) {
    throw ContractViolation("embedder '" + embedder.name() + "' returned a vector of wrong width");
  }
  return v;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "cosine: length mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<DocId> CandidateList::doc_ids() const {
  std::vector<DocId> ids;
  ids.reserve(ranked.size());
  for (const auto& scored : ranked) ids.push_back(scored.doc_id);
  return ids;
}

std::string document_text(const Document& doc) {
  std::string text = doc.title;
  for (const auto& sentence : doc.sentences) {
    text.push_back(' ');
    text += sentence;
  }
  return text;
}

RetrievalIndex::RetrievalIndex(const Corpus& corpus, const Embedder& embedder)
    : embedder_(embedder) {
  doc_ids_.reserve(corpus.size());
  vectors_.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    const auto dense = embed_text(embedder, document_text(doc));
    SparseVector sparse;
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i] != 0.0) {
        sparse.entries.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
        sparse.norm += dense[i] * dense[i];
      }
    }
    sparse.norm = std::sqrt(sparse.norm);
    doc_ids_.push_back(doc.doc_id);
    vectors_.push_back(std::move(sparse));
  }
}

CandidateList RetrievalIndex::topk(ClaimId claim_id, std::string_view claim_text, int k) const {
  require(k >= 1, "topk: k must be at least 1");
  const auto query = embed_text(embedder_, claim_text);
  double query_norm = 0.0;
  for (double x : query) query_norm += x * x;
  query_norm = std::sqrt(query_norm);

  std::vector<ScoredDoc> scored;
  scored.reserve(doc_ids_.size());
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    const auto& doc = vectors_[d];
    double score = 0.0;
    if (query_norm > 0.0 && doc.norm > 0.0) {
      double dot = 0.0;
      for (const auto& [i, x] : doc.entries) dot += query[i] * x;
      score = dot / (query_norm * doc.norm);
    }
    scored.push_back({doc_ids_[d], score});
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    ranks_before);
  scored.resize(keep);
  return {claim_id, std::move(scored)};
}

CandidateList topk_candidates(const Claim& claim, const Corpus& corpus, const Embedder& embedder,
                              int k) {
  return RetrievalIndex(corpus, embedder).topk(claim.claim_id, claim.text, k);
}

void write_candidate_lists(std::ostream& out, const std::vector<CandidateList>& lists) {
  for (const auto& list : lists) {
    nlohmann::json record;
    record["claim_id"] = list.claim_id;
    auto& ids = record["doc_ids"] = nlohmann::json::array();
    auto& scores = record["scores"] = nlohmann::json::array();
    for (const auto& scored : list.ranked) {
      ids.push_back(scored.doc_id);
      scores.push_back(scored.score);
    }
    out << record.dump() << '\n';
  }
}

std::vector<CandidateList> parse_candidate_lists(std::istream& in) {
  std::vector<CandidateList> lists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      CandidateList list;
      list.claim_id = record.at("claim_id").get<ClaimId>();
      const auto ids = record.at("doc_ids").get<std::vector<DocId>>();
      std::vector<double> scores(ids.size(), 0.0);
      if (record.contains("scores")) scores = record.at("scores").get<std::vector<double>>();
      if (scores.size() != ids.size()) throw ParseError(line_no, "doc_ids and scores differ in length");
      for (std::size_t i = 0; i < ids.size(); ++i) list.ranked.push_back({ids[i], scores[i]});
      lists.push_back(std::move(list));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return lists;
}

CandidateMap to_candidate_map(const std::vector<CandidateList>& lists) {
  CandidateMap map;
  for (const auto& list : lists) map[list.claim_id] = list.doc_ids();
  return map;
}

}  // namespace arsjoint
