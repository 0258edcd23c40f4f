#include <random>
#include <set>

#include <doctest.h>

#include "arsjoint/errors.hpp"
#include "arsjoint/eval.hpp"
#include "oracles.hpp"
#include "random_corpora.hpp"

using namespace arsjoint;

namespace {

Claim gold_claim(ClaimId id, DocId doc, std::vector<std::vector<int>> groups, Stance stance) {
  Claim c;
  c.claim_id = id;
  c.text = "claim";
  c.cited_doc_ids = {doc};
  c.evidence[doc] = EvidenceSet{std::move(groups), stance};
  return c;
}

Prediction predicted(ClaimId id, DocId doc, std::vector<int> sentences, Stance stance) {
  AbstractPrediction a;
  a.doc_id = doc;
  a.relevant = true;
  a.rationale_indices = std::move(sentences);
  a.stance = stance;
  return Prediction{id, {a}};
}

Counts counts(const ModeMetrics& m) { return m.counts; }

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("metric arithmetic") {
  const auto m = metrics_from_counts({2, 4, 8});
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.25);
  CHECK(m.f1 == doctest::Approx(2 * 0.5 * 0.25 / 0.75));
  const auto zero = metrics_from_counts({0, 0, 0});
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f1 == 0.0);
  CHECK(metrics_from_counts({0, 3, 4}).f1 == 0.0);
}

TEST_CASE("complete group with the right stance") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2, 3}}, Stance::kSupport)};
  const auto r = evaluate({predicted(1, 7, {2, 3}, Stance::kSupport)}, gold);
  for (auto mode : {EvalMode::kSelectionOnly, EvalMode::kSelectionLabel, EvalMode::kLabelOnly,
                    EvalMode::kLabelRationale}) {
    CHECK(r.get(mode).precision == 1.0);
    CHECK(r.get(mode).recall == 1.0);
    CHECK(r.get(mode).f1 == 1.0);
  }
}

TEST_CASE("partial group earns nothing at sentence level") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2, 3}}, Stance::kSupport)};
  const auto m = sentence_metrics({predicted(1, 7, {2}, Stance::kSupport)}, gold, EvalMode::kSelectionOnly);
  CHECK(counts(m) == Counts{0, 1, 2});
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("noinfo predictions count for nothing") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2, 3}}, Stance::kSupport)};
  const std::vector<Prediction> p = {predicted(1, 7, {2, 3}, Stance::kNoInfo)};
  CHECK(sentence_metrics(p, gold, EvalMode::kSelectionOnly).counts.correct == 0);
  CHECK(sentence_metrics(p, gold, EvalMode::kSelectionLabel).counts.correct == 0);
  CHECK(abstract_metrics(p, gold, EvalMode::kLabelOnly).counts.predicted == 0);
}

TEST_CASE("stance mismatch") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2}}, Stance::kSupport)};
  const std::vector<Prediction> p = {predicted(1, 7, {2}, Stance::kRefute)};
  CHECK(counts(abstract_metrics(p, gold, EvalMode::kLabelOnly)) == Counts{0, 1, 1});
  CHECK(counts(sentence_metrics(p, gold, EvalMode::kSelectionOnly)) == Counts{1, 1, 1});
  CHECK(counts(sentence_metrics(p, gold, EvalMode::kSelectionLabel)) == Counts{0, 1, 1});
}

TEST_CASE("rationale containment at abstract level") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{1, 2}, {5}}, Stance::kRefute)};
  const std::vector<Prediction> p = {predicted(1, 7, {5, 6}, Stance::kRefute)};
  CHECK(counts(abstract_metrics(p, gold, EvalMode::kLabelRationale)) == Counts{1, 1, 1});
  const std::vector<Prediction> q = {predicted(1, 7, {1, 6}, Stance::kRefute)};
  CHECK(counts(abstract_metrics(q, gold, EvalMode::kLabelRationale)) == Counts{0, 1, 1});
  CHECK(counts(abstract_metrics(q, gold, EvalMode::kLabelOnly)) == Counts{1, 1, 1});
}

TEST_CASE("unknown and duplicate claims are rejected") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2}}, Stance::kSupport)};
  CHECK_THROWS_AS(evaluate({predicted(9, 7, {2}, Stance::kSupport)}, gold), ValidationError);
  CHECK_THROWS_AS(evaluate({predicted(1, 7, {2}, Stance::kSupport), predicted(1, 7, {2}, Stance::kSupport)}, gold),
                  ValidationError);
}

TEST_CASE("perfect predictions score one everywhere") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto gold = testing::random_gold(rng);
    std::vector<Prediction> preds;
    bool any = false;
    for (const auto& c : gold) {
      Prediction p{c.claim_id, {}};
      for (const auto& [doc, ev] : c.evidence) {
        AbstractPrediction a;
        a.doc_id = doc;
        a.relevant = true;
        a.stance = ev.stance;
        a.rationale_indices = ev.rationale_sentences();
        p.abstracts.push_back(a);
        any = true;
      }
      preds.push_back(p);
    }
    if (!any) continue;
    const auto r = evaluate(preds, gold);
    for (auto mode : {EvalMode::kSelectionOnly, EvalMode::kSelectionLabel, EvalMode::kLabelOnly,
                      EvalMode::kLabelRationale}) {
      CHECK(r.get(mode).f1 == 1.0);
    }
  }
}

TEST_CASE("counts equal the brute-force scorer") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    const auto gold = testing::random_gold(rng);
    const auto preds = testing::random_predictions(rng, gold);
    const auto r = evaluate(preds, gold);
    const auto b = testing::brute_force_score(preds, gold);
    auto same = [](const ModeMetrics& m, const testing::BruteCounts& c) {
      return m.counts.correct == c.correct && m.counts.predicted == c.predicted && m.counts.gold == c.gold;
    };
    CHECK(same(r.selection_only, b.selection_only));
    CHECK(same(r.selection_label, b.selection_label));
    CHECK(same(r.label_only, b.label_only));
    CHECK(same(r.label_rationale, b.label_rationale));
  }
}

TEST_CASE("adding a correct prediction never lowers recall") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto gold = testing::random_gold(rng);
    auto preds = testing::random_predictions(rng, gold);
    const auto before = evaluate(preds, gold);
    for (auto& p : preds) {
      const auto& claim = *std::find_if(gold.begin(), gold.end(), [&](const Claim& c) { return c.claim_id == p.claim_id; });
      for (const auto& [doc, ev] : claim.evidence) {
        const bool present = std::any_of(p.abstracts.begin(), p.abstracts.end(),
                                         [&](const AbstractPrediction& a) { return a.doc_id == doc; });
        if (present) continue;
        AbstractPrediction a;
        a.doc_id = doc;
        a.relevant = true;
        a.stance = ev.stance;
        a.rationale_indices = ev.rationale_sentences();
        p.abstracts.push_back(a);
        break;
      }
    }
    const auto after = evaluate(preds, gold);
    for (auto mode : {EvalMode::kSelectionOnly, EvalMode::kSelectionLabel, EvalMode::kLabelOnly,
                      EvalMode::kLabelRationale}) {
      CHECK(after.get(mode).recall >= before.get(mode).recall);
    }
  }
}

TEST_CASE("removing a wrong abstract never lowers abstract precision") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const auto gold = testing::random_gold(rng);
    auto preds = testing::random_predictions(rng, gold);
    const auto before = evaluate(preds, gold);
    for (auto& p : preds) {
      const auto& claim = *std::find_if(gold.begin(), gold.end(), [&](const Claim& c) { return c.claim_id == p.claim_id; });
      std::erase_if(p.abstracts, [&](const AbstractPrediction& a) {
        auto it = claim.evidence.find(a.doc_id);
        return it == claim.evidence.end() || it->second.stance != a.stance;
      });
    }
    const auto after = evaluate(preds, gold);
    CHECK(after.label_only.precision >= before.label_only.precision);
  }
}

TEST_CASE("report json carries all modes") {
  const std::vector<Claim> gold = {gold_claim(1, 7, {{2}}, Stance::kSupport)};
  const auto json = evaluate({predicted(1, 7, {2}, Stance::kSupport)}, gold).to_json();
  for (const char* key : {"sentence_level", "abstract_level", "selection_only", "selection_label", "label_only",
                          "label_rationale", "precision", "recall", "f1", "correct", "predicted", "gold"}) {
    CHECK(json.find(key) != std::string::npos);
  }
}

}
