// Acceptance runner: one PASS/FAIL line per criterion.
//   arsjoint_acceptance <fixture-dir> [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arsjoint/cli.hpp"
#include "arsjoint/eval.hpp"
#include "arsjoint/grad_check.hpp"
#include "arsjoint/heads.hpp"
#include "arsjoint/loss.hpp"
#include "arsjoint/retrieval.hpp"
#include "arsjoint/train.hpp"
#include "oracles.hpp"
#include "random_corpora.hpp"
#include "synthetic.hpp"

using namespace arsjoint;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// 1
Outcome attention_validity() {
  double worst_sum = 0.0, worst_perm = 0.0;
  bool in_range = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const int dim = 2 + static_cast<int>(rng() % 15);
    const int n = 1 + static_cast<int>(rng() % 12);
    ParameterMap params;
    init_attention_parameters(params, "attn.a.word", dim, rng);
    init_attention_parameters(params, "attn.a.sent", dim, rng);
    Tape t(false);
    const auto word = bind_attention(t, params, "attn.a.word");
    const auto sent = bind_attention(t, params, "attn.a.sent");

    const Matrix units = random_matrix(n, dim, rng) * 3.0;
    std::vector<Var> sentences;
    for (int i = 0; i < n; ++i) sentences.push_back(t.constant(random_matrix(1 + rng() % 6, dim, rng)));
    const Var title = seed % 2 ? t.constant(random_matrix(2, dim, rng)) : Var();

    for (const Matrix& a : {word_attention(t.constant(units), word).alphas.value(),
                            sentence_attention(t.constant(units), sent).alphas.value(),
                            han(title, sentences, word, sent).alphas.value()}) {
      in_range = in_range && a.minCoeff() >= 0.0 && a.maxCoeff() <= 1.0;
      worst_sum = std::max(worst_sum, std::abs(a.sum() - 1.0));
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix permuted(n, dim);
    for (int i = 0; i < n; ++i) permuted.row(i) = units.row(perm[static_cast<std::size_t>(i)]);
    const auto a = sentence_attention(t.constant(units), sent);
    const auto b = sentence_attention(t.constant(permuted), sent);
    for (int i = 0; i < n; ++i) {
      worst_perm = std::max(worst_perm, std::abs(b.alphas.value()(0, i) -
                                                 a.alphas.value()(0, perm[static_cast<std::size_t>(i)])));
    }
    worst_perm = std::max(worst_perm, (a.pooled.value() - b.pooled.value()).cwiseAbs().maxCoeff());
  }
  return {in_range && worst_sum <= 1e-6 && worst_perm <= 1e-6,
          "alphas in [0,1]=" + std::string(in_range ? "yes" : "no") + " max|sum-1|=" + fmt(worst_sum) +
              " max permutation gap=" + fmt(worst_perm)};
}

// 2
Outcome gradient_suite() {
  constexpr int kDim = 8;
  double worst = 0.0;
  std::string worst_at;
  auto note = [&](double err, const std::string& what) {
    if (err > worst) {
      worst = err;
      worst_at = what;
    }
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    ParameterMap params;
    init_head_parameters(params, kDim, rng);
    const Matrix claim = random_matrix(3, kDim, rng);
    const Matrix title = random_matrix(2, kDim, rng);
    std::vector<Matrix> sentences;
    for (int i = 0; i < 3; ++i) sentences.push_back(random_matrix(1 + static_cast<int>(rng() % 4), kDim, rng));
    const Matrix probe = random_matrix(1, kDim, rng);
    const std::vector<int> selected = {0, 2};
    const std::vector<int> labels = {1, 0, 1};
    const LossWeights weights;

    auto full = [&](Tape& t, const Var& claim_var) {
      const auto hp = bind_heads(t, params);
      std::vector<Var> s;
      for (const auto& m : sentences) s.push_back(t.constant(m));
      const auto ret = abstract_retrieval_head(claim_var, t.constant(title), s, hp);
      const auto rat = rationale_head(s, hp);
      const auto sta = stance_head(claim_var, rat.sentence_reps, selected, hp);
      return joint_loss(cross_entropy(ret.p_b, 1), rationale_cross_entropy(rat.p_r, labels),
                        cross_entropy(sta.p_e, 0), rr_loss(ret.sentence_alphas(), transpose(column(rat.p_r, 1))),
                        weights)
          .total;
    };
    note(grad_check(full, claim, 1e-5), "joint loss wrt claim tokens");
    note(grad_check_parameters([&](Tape& t) { return full(t, t.constant(claim)); }, params, 1e-5),
         "joint loss wrt head parameters");

    auto pooled = [&](Tape& t, const Var& x) {
      const auto w = word_attention(x, bind_attention(t, params, "attn.ret.word"));
      const auto s = sentence_attention(x, bind_attention(t, params, "attn.sta.sent"));
      return add(sum(hadamard(add(w.pooled, s.pooled), t.constant(probe))), pick(s.alphas, 0, 1));
    };
    note(grad_check(pooled, sentences[0].rows() > 1 ? sentences[0] : claim, 1e-5), "word/sentence attention");

    auto doc = [&](Tape& t, const Var& x) {
      std::vector<Var> s = {x, t.constant(sentences[1])};
      const auto r = han(t.constant(title), s, bind_attention(t, params, "attn.ret.word"),
                         bind_attention(t, params, "attn.ret.sent"));
      return add(sum(hadamard(r.pooled, t.constant(probe))), pick(r.alphas, 0, 1));
    };
    note(grad_check(doc, sentences[0], 1e-5), "han");

    Matrix a = (random_matrix(1, 4, rng).array().tanh() * 0.4 + 0.5).matrix();
    const Matrix b = (random_matrix(1, 4, rng).array().tanh() * 0.4 + 0.5).matrix();
    note(grad_check([&](Tape& t, const Var& x) { return rr_loss(x, t.constant(b)); }, a, 1e-6), "rr_loss");
  }
  return {worst <= 1e-4, "max relative error=" + fmt(worst) + (worst_at.empty() ? "" : " (" + worst_at + ")")};
}

double binary_entropy_sum(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double x = std::clamp(p[i], kLogEpsilon, 1.0 - kLogEpsilon);
    h -= p[i] * std::log(x) + (1.0 - p[i]) * std::log(1.0 - x);
  }
  return h;
}

// 3
Outcome rr_properties() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool symmetric = true, nonneg = true, gibbs = true;
  double worst_equal = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 8);
    Eigen::VectorXd p(n), q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = u(rng);
      q[i] = u(rng);
    }
    symmetric = symmetric && rr_loss(p, q) == rr_loss(q, p);
    nonneg = nonneg && rr_loss(p, q) >= 0.0;
    gibbs = gibbs && rr_divergence(p, q) - binary_entropy_sum(p) > 1e-6;
    worst_equal = std::max(worst_equal, std::abs(rr_divergence(p, p) - binary_entropy_sum(p)));
  }
  Eigen::VectorXd half(1), hi(1), lo(1);
  half << 0.5;
  hi << 0.9;
  lo << 0.1;
  const double ln2_gap = std::abs(rr_divergence(half, half) - std::log(2.0));
  const double hand = 2.0 * (-0.9 * std::log(0.1) - 0.1 * std::log(0.9));  // 4.165726
  const double pair_gap = std::abs(rr_loss(hi, lo) - hand);
  const bool pass = symmetric && nonneg && gibbs && worst_equal <= 1e-6 && ln2_gap <= 1e-4 && pair_gap <= 1e-4;
  return {pass, std::string("symmetric=") + (symmetric ? "yes" : "no") + " nonneg=" + (nonneg ? "yes" : "no") +
                    " strict entropy bound=" + (gibbs ? "yes" : "no") + " |D(p,p)-H|max=" + fmt(worst_equal) +
                    " |D-ln2|=" + fmt(ln2_gap) + " |L-hand|=" + fmt(pair_gap) +
                    " (L=" + fmt(rr_loss(hi, lo), 7) + ", quoted 4.1659)"};
}

// 4
Outcome scheduled_sampling() {
  bool endpoints = true, monotone = true;
  for (int total = 2; total <= 300; ++total) {
    endpoints = endpoints && sample_probability(1, total) == 0.0 && sample_probability(total, total) == 1.0;
    for (int e = 2; e <= total; ++e) monotone = monotone && sample_probability(e, total) >= sample_probability(e - 1, total);
  }
  double mid = 0.0;
  for (int total : {3, 5, 21, 201}) {
    mid = std::max(mid, std::abs(sample_probability((total + 1) / 2, total) - std::sin(std::numbers::pi / 4.0)));
  }
  return {endpoints && monotone && mid <= 1e-6, std::string("endpoints=") + (endpoints ? "0,1" : "wrong") +
                                                    " monotone=" + (monotone ? "yes" : "no") +
                                                    " midpoint gap=" + fmt(mid)};
}

// 5
Outcome eval_oracle() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  bool empty = false, noinfo = false, partial = false, superset = false;
  for (int trial = 0; trial < 200; ++trial) {
    const auto gold = testing::random_gold(rng);
    const auto preds = testing::random_predictions(rng, gold);
    const auto r = evaluate(preds, gold);
    const auto b = testing::brute_force_score(preds, gold);
    auto same = [](const ModeMetrics& m, const testing::BruteCounts& c) {
      return m.counts.correct == c.correct && m.counts.predicted == c.predicted && m.counts.gold == c.gold;
    };
    mismatches += !same(r.selection_only, b.selection_only) + !same(r.selection_label, b.selection_label) +
                  !same(r.label_only, b.label_only) + !same(r.label_rationale, b.label_rationale);
    for (const auto& p : preds) {
      const auto& claim = *std::find_if(gold.begin(), gold.end(), [&](const Claim& c) { return c.claim_id == p.claim_id; });
      if (p.abstracts.empty()) empty = true;
      for (const auto& a : p.abstracts) {
        if (a.rationale_indices.empty()) empty = true;
        if (a.relevant && a.stance == Stance::kNoInfo) noinfo = true;
        auto it = claim.evidence.find(a.doc_id);
        if (it == claim.evidence.end()) continue;
        const std::set<int> chosen(a.rationale_indices.begin(), a.rationale_indices.end());
        for (const auto& g : it->second.rationale_groups) {
          const auto hits = std::count_if(g.begin(), g.end(), [&](int s) { return chosen.count(s) > 0; });
          if (hits > 0 && hits < static_cast<long>(g.size())) partial = true;
          if (hits == static_cast<long>(g.size()) && chosen.size() > g.size()) superset = true;
        }
      }
    }
  }
  const bool covered = empty && noinfo && partial && superset;
  return {mismatches == 0 && covered, "count mismatches=" + std::to_string(mismatches) +
                                          " covered empty/NOINFO/partial/superset=" + (covered ? "yes" : "no")};
}

struct TinySetup {
  testing::SyntheticBenchmark bench;
  Corpus corpus;
  std::vector<LabeledInstance> instances;
  std::unique_ptr<HashedBowEmbedder> embedder;
  std::unique_ptr<RetrievalIndex> index;

  TinySetup() : bench(testing::make_synthetic_benchmark()), corpus(bench.documents) {
    embedder = std::make_unique<HashedBowEmbedder>();
    index = std::make_unique<RetrievalIndex>(corpus, *embedder);
    TrainConfig defaults;
    CandidateMap cands;
    for (const auto& c : bench.claims) cands[c.claim_id] = index->topk(c.claim_id, c.text, defaults.k_tra).doc_ids();
    instances = build_instances(bench.claims, corpus, cands, defaults.k_tra);
  }
};

// 6
Outcome tiny_overfit() {
  TinySetup s;
  TrainConfig config;  // learning rates stay at their defaults
  config.dim = 32;
  config.epochs = 200;
  const auto start = std::chrono::steady_clock::now();
  const auto result = train(s.instances, s.bench.claims, s.corpus, config);
  std::vector<Prediction> preds;
  for (const auto& c : s.bench.claims) preds.push_back(predict(result.checkpoint, c, s.corpus, *s.index, config.k_ret));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto report = evaluate(preds, s.bench.claims);
  const double label = report.label_only.f1, selection = report.selection_only.f1;
  return {label == 1.0 && selection >= 0.9 && secs < 300.0,
          "label_only F1=" + fmt(label) + " selection_only F1=" + fmt(selection) + " L_total " +
              fmt(result.history.front().mean.total) + "->" + fmt(result.history.back().mean.total) + " in " +
              fmt(secs, 3) + "s (" + std::to_string(s.instances.size()) + " instances, " +
              std::to_string(config.epochs) + " epochs)"};
}

// 7
Outcome ablation_direction() {
  constexpr int kEpochs = 50;
  TinySetup s;
  double rat_with = 0.0, rat_without = 0.0, rr_first = 0.0, rr_last = 0.0, worst_seed_drop = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig config;
    config.dim = 32;
    config.epochs = kEpochs;
    config.seed = seed;
    const auto with = train(s.instances, s.bench.claims, s.corpus, config).history;
    config.weights.gamma = 0.0;
    const auto without = train(s.instances, s.bench.claims, s.corpus, config).history;
    rat_with += with.back().mean.rationale / 5.0;
    rat_without += without.back().mean.rationale / 5.0;
    rr_first += with.front().mean.rr / 5.0;
    rr_last += with.back().mean.rr / 5.0;
    worst_seed_drop = std::min(worst_seed_drop, 1.0 - with.back().mean.rr / with.front().mean.rr);
  }
  const double rel = std::abs(rat_with - rat_without) / rat_without;
  const double drop = 1.0 - rr_last / rr_first;
  return {rel <= 0.10 && drop >= 0.5,
          "mean final L_rat " + fmt(rat_with) + " (gamma>0) vs " + fmt(rat_without) + " (gamma=0), rel diff " +
              fmt(rel) + "; L_RR " + fmt(rr_first) + "->" + fmt(rr_last) + " drop " + fmt(drop) +
              " (worst seed " + fmt(worst_seed_drop) + ", " + std::to_string(kEpochs) + " epochs)"};
}

// 8
Outcome retrieval_sanity() {
  TinySetup s;
  int hits = 0, gold = 0;
  for (const auto& c : s.bench.claims) {
    const auto top = s.index->topk(c.claim_id, c.text, 3).doc_ids();
    for (const auto& [doc, ev] : c.evidence) {
      ++gold;
      hits += static_cast<int>(std::count(top.begin(), top.end(), doc));
    }
  }
  std::mt19937_64 rng(8);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g", "h", "cell", "gene", "dose", "risk"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  HashedBowEmbedder small(64);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 100);
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
      Document d;
      d.doc_id = static_cast<DocId>((i * 7919) % 100003 + 1);
      d.title = words[pick(rng)];
      for (int k = 0; k < 2; ++k) d.sentences.push_back(words[pick(rng)] + " " + words[pick(rng)]);
      docs.push_back(d);
    }
    Claim c;
    c.claim_id = trial;
    c.text = words[pick(rng)] + " " + words[pick(rng)];
    const int k = 1 + static_cast<int>(rng() % 40);
    const auto got = topk_candidates(c, Corpus(docs), small, k).ranked;
    const auto want = testing::brute_force_topk(docs, c.text, small, k);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i].doc_id == want[i].doc_id;
    bad += !same;
  }
  return {hits == gold && bad == 0,
          "recall@3=" + std::to_string(hits) + "/" + std::to_string(gold) + " top-k mismatches=" + std::to_string(bad)};
}

// 9
Outcome end_to_end(const fs::path& fixture) {
  const fs::path work = fs::temp_directory_path() / ("arsjoint-e2e-" + std::to_string(std::random_device{}()));
  fs::create_directories(work);
  auto path = [&](const std::string& name) { return (work / name).string(); };
  const auto corpus = (fixture / "corpus.jsonl").string();
  const auto claims_train = (fixture / "claims_train.jsonl").string();
  const auto claims_dev = (fixture / "claims_dev.jsonl").string();

  std::ostringstream out, err;
  auto step = [&](std::vector<std::string> args) {
    out.str("");
    const int code = run(args, out, err);
    return code == kExitOk;
  };
  Outcome o;
  if (!step({"retrieve", "--corpus", corpus, "--claims", claims_train, "--candidates", path("cand.jsonl")}) ||
      !step({"train", "--corpus", corpus, "--claims", claims_train, "--candidates", path("cand.jsonl"),
             "--checkpoint", path("model.ckpt"), "--epochs", "1", "--dim", "32", "--log", path("train.log")}) ||
      !step({"predict", "--checkpoint", path("model.ckpt"), "--corpus", corpus, "--claims", claims_dev, "--pred",
             path("pred.jsonl")}) ||
      !step({"evaluate", "--gold", claims_dev, "--pred", path("pred.jsonl")})) {
    o.detail = "pipeline failed: " + err.str().substr(err.str().rfind("error") == std::string::npos ? 0 : err.str().rfind("error"));
  } else {
    const auto report = nlohmann::json::parse(out.str());
    bool in_range = true;
    int modes = 0;
    std::ostringstream scores;
    for (const auto& level : {"sentence_level", "abstract_level"}) {
      for (const auto& [mode, m] : report.at(level).items()) {
        ++modes;
        for (const auto* key : {"precision", "recall", "f1"}) {
          const double v = m.at(key).get<double>();
          in_range = in_range && v >= 0.0 && v <= 1.0;
        }
        scores << ' ' << mode << "=" << fmt(m.at("f1").get<double>(), 3);
      }
    }
    o.pass = in_range && modes == 4;
    o.detail = std::to_string(modes) + " modes in [0,1]=" + (in_range ? "yes" : "no") + "; F1" + scores.str();
  }
  fs::remove_all(work);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: arsjoint_acceptance <fixture-dir> [criterion ...]\n";
    return 2;
  }
  const fs::path fixture = argv[1];
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  // 0: none
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "attention validity", 30, attention_validity},
      {2, "gradient suite", 120, gradient_suite},
      {3, "rr properties", 0, rr_properties},
      {4, "scheduled sampling", 0, scheduled_sampling},
      {5, "evaluation oracle equivalence", 60, eval_oracle},
      {6, "tiny overfit", 300, tiny_overfit},
      {7, "ablation direction", 0, ablation_direction},
      {8, "retrieval sanity", 0, retrieval_sanity},
      {9, "end-to-end on scifact-format files", 0, [&] { return end_to_end(fixture); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += " [over " + fmt(c.budget_seconds, 3) + "s budget]";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  " << c.name << ": " << o.detail << "  ("
              << std::fixed << std::setprecision(1) << secs << "s)" << std::defaultfloat << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
