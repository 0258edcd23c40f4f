#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "arsjoint/data.hpp"
#include "arsjoint/train.hpp"

namespace arsjoint {

enum class EvalMode { kSelectionOnly, kSelectionLabel, kLabelOnly, kLabelRationale };

std::string_view mode_name(EvalMode mode);

struct Counts {
  long correct = 0;
  long predicted = 0;
  long gold = 0;

  bool operator==(const Counts&) const = default;
};

struct ModeMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Counts counts;
};

// P = correct/predicted, R = correct/gold (0 on empty denominators), F1 = 2PR/(P+R) or 0.
ModeMetrics metrics_from_counts(const Counts& counts);

// Only abstracts that a system would report (relevant, stance not NOINFO)
// count as predictions at either level.
//
// Sentence level: a predicted rationale sentence is correct when it belongs to
// a gold group that is fully predicted for that (claim, abstract); in
// selection_label mode the predicted stance must also match gold.
// Gold count: all gold rationale sentences.
ModeMetrics sentence_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<Claim>& gold, EvalMode mode);

// Abstract level: a predicted (claim, abstract) is correct when the abstract is
// gold evidence with the same stance; label_rationale also needs some complete
// gold group inside the predicted sentences. Gold count: all evidence pairs.
ModeMetrics abstract_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<Claim>& gold, EvalMode mode);

struct MetricsReport {
  ModeMetrics selection_only;
  ModeMetrics selection_label;
  ModeMetrics label_only;
  ModeMetrics label_rationale;

  const ModeMetrics& get(EvalMode mode) const;
  std::string to_json() const;
};

MetricsReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Claim>& gold);

}  // namespace arsjoint
