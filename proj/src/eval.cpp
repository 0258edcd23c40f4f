#include "arsjoint/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "arsjoint/errors.hpp"

namespace arsjoint {

std::string_view mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::kSelectionOnly:
      return "selection_only";
    case EvalMode::kSelectionLabel:
      return "selection_label";
    case EvalMode::kLabelOnly:
      return "label_only";
    case EvalMode::kLabelRationale:
      return "label_rationale";
  }
  return "unknown";
}

ModeMetrics metrics_from_counts(const Counts& counts) {
  ModeMetrics m;
  m.counts = counts;
  m.precision = counts.predicted == 0 ? 0.0 : static_cast<double>(counts.correct) / counts.predicted;
  m.recall = counts.gold == 0 ? 0.0 : static_cast<double>(counts.correct) / counts.gold;
  m.f1 = m.precision + m.recall == 0.0 ? 0.0
                                       : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

namespace {

struct ReportedAbstract {
  std::set<int> sentences;
  Stance stance;
};

using ClaimIndex = std::map<ClaimId, const Claim*>;

ClaimIndex index_claims(const std::vector<Claim>& gold) {
  ClaimIndex index;
  for (const auto& claim : gold) {
    if (!index.emplace(claim.claim_id, &claim).second) {
      throw ValidationError("duplicate gold claim " + std::to_string(claim.claim_id));
    }
  }
  return index;
}

// Reported abstracts per claim, after validating claim ids.
std::map<ClaimId, std::map<DocId, ReportedAbstract>> reported(const std::vector<Prediction>& predictions,
                                                             const ClaimIndex& gold) {
  std::map<ClaimId, std::map<DocId, ReportedAbstract>> out;
  for (const auto& prediction : predictions) {
    if (gold.count(prediction.claim_id) == 0) {
      throw ValidationError("prediction for unknown claim " + std::to_string(prediction.claim_id));
    }
    if (out.count(prediction.claim_id) != 0) {
      throw ValidationError("duplicate prediction for claim " + std::to_string(prediction.claim_id));
    }
    auto& docs = out[prediction.claim_id];
    for (const auto& abstract : prediction.abstracts) {
      if (!abstract.reported()) continue;
      auto& entry = docs[abstract.doc_id];
      entry.stance = abstract.stance;
      entry.sentences.insert(abstract.rationale_indices.begin(), abstract.rationale_indices.end());
    }
  }
  return out;
}

bool contains_group(const std::set<int>& predicted, const std::vector<int>& group) {
  return std::all_of(group.begin(), group.end(), [&](int s) { return predicted.count(s) != 0; });
}

}  // namespace

ModeMetrics sentence_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<Claim>& gold, EvalMode mode) {
  require(mode == EvalMode::kSelectionOnly || mode == EvalMode::kSelectionLabel,
          "sentence_metrics: not a sentence-level mode");
  const auto claims = index_claims(gold);
  const auto predicted = reported(predictions, claims);

  Counts counts;
  for (const auto& claim : gold) {
    for (const auto& [doc_id, evidence] : claim.evidence) {
      for (const auto& group : evidence.rationale_groups) counts.gold += static_cast<long>(group.size());
    }
  }
  for (const auto& [claim_id, docs] : predicted) {
    const auto& claim = *claims.at(claim_id);
    for (const auto& [doc_id, abstract] : docs) {
      counts.predicted += static_cast<long>(abstract.sentences.size());
      auto ev = claim.evidence.find(doc_id);
      if (ev == claim.evidence.end()) continue;
      if (mode == EvalMode::kSelectionLabel && abstract.stance != ev->second.stance) continue;
      for (const auto& group : ev->second.rationale_groups) {
        if (contains_group(abstract.sentences, group)) counts.correct += static_cast<long>(group.size());
      }
    }
  }
  return metrics_from_counts(counts);
}

ModeMetrics abstract_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<Claim>& gold, EvalMode mode) {
  require(mode == EvalMode::kLabelOnly || mode == EvalMode::kLabelRationale,
          "abstract_metrics: not an abstract-level mode");
  const auto claims = index_claims(gold);
  const auto predicted = reported(predictions, claims);

  Counts counts;
  for (const auto& claim : gold) counts.gold += static_cast<long>(claim.evidence.size());
  for (const auto& [claim_id, docs] : predicted) {
    const auto& claim = *claims.at(claim_id);
    for (const auto& [doc_id, abstract] : docs) {
      ++counts.predicted;
      auto ev = claim.evidence.find(doc_id);
      if (ev == claim.evidence.end() || abstract.stance != ev->second.stance) continue;
      if (mode == EvalMode::kLabelRationale) {
        const auto& groups = ev->second.rationale_groups;
        const bool rationalized = std::any_of(groups.begin(), groups.end(), [&](const auto& group) {
          return contains_group(abstract.sentences, group);
        });
        if (!rationalized) continue;
      }
      ++counts.correct;
    }
  }
  return metrics_from_counts(counts);
}

const ModeMetrics& MetricsReport::get(EvalMode mode) const {
  switch (mode) {
    case EvalMode::kSelectionOnly:
      return selection_only;
    case EvalMode::kSelectionLabel:
      return selection_label;
    case EvalMode::kLabelOnly:
      return label_only;
    case EvalMode::kLabelRationale:
      return label_rationale;
  }
  throw ContractViolation("unknown evaluation mode");
}

std::string MetricsReport::to_json() const {
  auto mode_json = [](const ModeMetrics& m) {
    return nlohmann::json{{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"correct", m.counts.correct},
                          {"predicted", m.counts.predicted},
                          {"gold", m.counts.gold}};
  };
  nlohmann::json j;
  j["sentence_level"] = {{"selection_only", mode_json(selection_only)},
                         {"selection_label", mode_json(selection_label)}};
  j["abstract_level"] = {{"label_only", mode_json(label_only)},
                         {"label_rationale", mode_json(label_rationale)}};
  return j.dump(2);
}

MetricsReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Claim>& gold) {
  return {sentence_metrics(predictions, gold, EvalMode::kSelectionOnly),
          sentence_metrics(predictions, gold, EvalMode::kSelectionLabel),
          abstract_metrics(predictions, gold, EvalMode::kLabelOnly),
          abstract_metrics(predictions, gold, EvalMode::kLabelRationale)};
}

}  // namespace arsjoint
