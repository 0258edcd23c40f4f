#include "arsjoint/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "arsjoint/errors.hpp"

namespace arsjoint {

using nlohmann::json;

namespace {

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

// Iterates non-blank lines, handing each parsed JSON object and its 1-based line number.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record is not an object");
    try {
      fn(record, line_no);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

const json& field(const json& record, const char* name, std::size_t line_no) {
  auto it = record.find(name);
  if (it == record.end()) throw ParseError(line_no, std::string("missing field '") + name + "'");
  return *it;
}

// SciFact writes evidence keys as strings; accept either representation for ids.
std::int64_t as_id(const json& value, std::size_t line_no) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    std::size_t used = 0;
    try {
      auto id = std::stoll(s, &used);
      if (used == s.size()) return id;
    } catch (const std::exception&) {
    }
  }
  throw ParseError(line_no, "identifier is not an integer: " + value.dump());
}

}  // namespace

std::string_view stance_name(Stance stance) {
  switch (stance) {
    case Stance::kSupport:
      return "SUPPORT";
    case Stance::kRefute:
      return "CONTRADICT";
    case Stance::kNoInfo:
      return "NOINFO";
  }
  return "NOINFO";
}

std::optional<Stance> parse_stance(std::string_view text, bool allow_noinfo) {
  if (text == "SUPPORT" || text == "SUPPORTS") return Stance::kSupport;
  if (text == "CONTRADICT" || text == "REFUTE" || text == "REFUTES") return Stance::kRefute;
  if (allow_noinfo && (text == "NOINFO" || text == "NOT_ENOUGH_INFO" || text == "NEI")) {
    return Stance::kNoInfo;
  }
  return std::nullopt;
}

std::vector<int> EvidenceSet::rationale_sentences() const {
  std::set<int> all;
  for (const auto& group : rationale_groups) all.insert(group.begin(), group.end());
  return {all.begin(), all.end()};
}

void LabeledInstance::validate() const {
  const bool any_rationale = std::find(y_r.begin(), y_r.end(), 1) != y_r.end();
  if (!y_b && (any_rationale || y_e != Stance::kNoInfo)) {
    throw ValidationError("irrelevant instance must have no rationales and NOINFO stance");
  }
  if (y_b && (!any_rationale || y_e == Stance::kNoInfo)) {
    throw ValidationError("relevant instance needs a rationale and a SUPPORT/REFUTE stance");
  }
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (!index_.emplace(doc.doc_id, i).second) {
      throw ValidationError("duplicate doc_id " + std::to_string(doc.doc_id));
    }
    if (doc.sentences.empty()) {
      throw ValidationError("document " + std::to_string(doc.doc_id) + " has an empty abstract");
    }
    for (const auto& sentence : doc.sentences) {
      if (blank(sentence)) {
        throw ValidationError("document " + std::to_string(doc.doc_id) + " has an empty sentence");
      }
    }
  }
}

const Document* Corpus::find(DocId doc_id) const {
  auto it = index_.find(doc_id);
  return it == index_.end() ? nullptr : &documents_[it->second];
}

const Document& Corpus::at(DocId doc_id) const {
  const auto* doc = find(doc_id);
  if (doc == nullptr) throw ValidationError("unknown doc_id " + std::to_string(doc_id));
  return *doc;
}

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> documents;
  for_each_record(in, [&](const json& record, std::size_t line_no) {
    Document doc;
    doc.doc_id = as_id(field(record, "doc_id", line_no), line_no);
    doc.title = field(record, "title", line_no).get<std::string>();
    doc.sentences = field(record, "abstract", line_no).get<std::vector<std::string>>();
    documents.push_back(std::move(doc));
  });
  // Runs the uniqueness and non-empty checks.
  Corpus checked(documents);
  return documents;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Document>& documents) {
  for (const auto& doc : documents) {
    json record = {{"doc_id", doc.doc_id}, {"title", doc.title}, {"abstract", doc.sentences}};
    out << record.dump() << '\n';
  }
}

namespace {

EvidenceSet parse_evidence_set(const json& groups, std::size_t line_no) {
  if (!groups.is_array() || groups.empty()) {
    throw ParseError(line_no, "evidence entry must be a non-empty list of rationale groups");
  }
  EvidenceSet evidence;
  std::optional<Stance> stance;
  std::set<int> seen;
  for (const auto& group : groups) {
    const auto label = field(group, "label", line_no).get<std::string>();
    auto parsed = parse_stance(label, /*allow_noinfo=*/false);
    if (!parsed) throw ValidationError("line " + std::to_string(line_no) + ": invalid stance '" + label + "'");
    if (stance && *stance != *parsed) {
      throw ValidationError("line " + std::to_string(line_no) + ": conflicting stances within one document");
    }
    stance = parsed;
    auto sentences = field(group, "sentences", line_no).get<std::vector<int>>();
    if (sentences.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty rationale group");
    }
    for (int index : sentences) {
      if (index < 0 || !seen.insert(index).second) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": rationale groups must be disjoint with non-negative indices");
      }
    }
    evidence.rationale_groups.push_back(std::move(sentences));
  }
  evidence.stance = *stance;
  return evidence;
}

}  // namespace

std::vector<Claim> parse_claims(std::istream& in) {
  std::vector<Claim> claims;
  for_each_record(in, [&](const json& record, std::size_t line_no) {
    Claim claim;
    claim.claim_id = as_id(field(record, "id", line_no), line_no);
    claim.text = field(record, "claim", line_no).get<std::string>();
    if (blank(claim.text)) throw ValidationError("line " + std::to_string(line_no) + ": empty claim text");
    if (auto it = record.find("cited_doc_ids"); it != record.end()) {
      for (const auto& id : *it) claim.cited_doc_ids.push_back(as_id(id, line_no));
    }
    if (auto it = record.find("evidence"); it != record.end() && !it->is_null()) {
      for (const auto& [key, groups] : it->items()) {
        const DocId doc_id = as_id(json(key), line_no);
        claim.evidence.emplace(doc_id, parse_evidence_set(groups, line_no));
        if (std::find(claim.cited_doc_ids.begin(), claim.cited_doc_ids.end(), doc_id) ==
            claim.cited_doc_ids.end()) {
          throw ValidationError("line " + std::to_string(line_no) + ": evidence doc " +
                                std::to_string(doc_id) + " is not in cited_doc_ids");
        }
      }
    }
    claims.push_back(std::move(claim));
  });
  return claims;
}

std::vector<Claim> load_claims(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return parse_claims(in);
}

void write_claims(std::ostream& out, const std::vector<Claim>& claims) {
  for (const auto& claim : claims) {
    json evidence = json::object();
    for (const auto& [doc_id, set] : claim.evidence) {
      json groups = json::array();
      for (const auto& group : set.rationale_groups) {
        groups.push_back({{"sentences", group}, {"label", stance_name(set.stance)}});
      }
      evidence[std::to_string(doc_id)] = std::move(groups);
    }
    json record = {{"id", claim.claim_id},
                   {"claim", claim.text},
                   {"evidence", std::move(evidence)},
                   {"cited_doc_ids", claim.cited_doc_ids}};
    out << record.dump() << '\n';
  }
}

std::vector<LabeledInstance> build_instances(const std::vector<Claim>& claims, const Corpus& corpus,
                                             const CandidateMap& candidates, int k_tra) {
  if (k_tra < 1) throw ContractViolation("k_tra must be at least 1");
  for (const auto& [claim_id, ranked] : candidates) {
    for (DocId doc_id : ranked) {
      if (corpus.find(doc_id) == nullptr) {
        throw ValidationError("candidate doc " + std::to_string(doc_id) + " for claim " +
                              std::to_string(claim_id) + " is not in the corpus");
      }
    }
  }

  std::vector<LabeledInstance> instances;
  for (const auto& claim : claims) {
    for (const auto& [doc_id, evidence] : claim.evidence) {
      const auto& doc = corpus.at(doc_id);
      for (const auto& group : evidence.rationale_groups) {
        for (int index : group) {
          if (index >= static_cast<int>(doc.sentences.size())) {
            throw ValidationError("claim " + std::to_string(claim.claim_id) + ": sentence index " +
                                  std::to_string(index) + " out of range for doc " +
                                  std::to_string(doc_id));
          }
        }
      }
    }

    const std::size_t cap = std::max<std::size_t>(k_tra, claim.evidence.size());
    const std::size_t negative_budget = cap - claim.evidence.size();

    std::vector<DocId> chosen;
    std::set<DocId> seen;
    std::size_t negatives = 0;
    if (auto it = candidates.find(claim.claim_id); it != candidates.end()) {
      for (DocId doc_id : it->second) {
        if (!seen.insert(doc_id).second) continue;
        if (claim.evidence.count(doc_id) != 0) {
          chosen.push_back(doc_id);
        } else if (negatives < negative_budget) {
          chosen.push_back(doc_id);
          ++negatives;
        }
      }
    }
    for (const auto& [doc_id, evidence] : claim.evidence) {
      if (seen.insert(doc_id).second) chosen.push_back(doc_id);
    }

    for (DocId doc_id : chosen) {
      const auto& doc = corpus.at(doc_id);
      LabeledInstance instance;
      instance.claim_id = claim.claim_id;
      instance.doc_id = doc_id;
      instance.y_r.assign(doc.sentences.size(), 0);
      if (auto ev = claim.evidence.find(doc_id); ev != claim.evidence.end()) {
        instance.y_b = true;
        instance.y_e = ev->second.stance;
        for (int index : ev->second.rationale_sentences()) instance.y_r[index] = 1;
      }
      instance.validate();
      instances.push_back(std::move(instance));
    }
  }
  return instances;
}

}  // namespace arsjoint
