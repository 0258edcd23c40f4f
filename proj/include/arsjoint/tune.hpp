#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "arsjoint/eval.hpp"
#include "arsjoint/loss.hpp"

namespace arsjoint {

struct WeightRange {
  double low = 0.1;
  double high = 12.0;
};

struct SearchSpec {
  // lambda1, lambda2, lambda3, gamma
  std::array<WeightRange, 4> ranges{};
  int trials = 100;
  double tune_fraction = 0.2;
  double validation_fraction = 0.2;
  std::uint64_t seed = 13;
  std::string objective = "mean(abstract label_rationale F1, sentence selection_label F1)";

  void validate() const;
};

struct Trial {
  int index = 0;
  LossWeights weights;
  double objective = 0.0;
  bool ok = false;
  std::string error;
};

struct SearchResult {
  LossWeights best;
  double best_objective = 0.0;
  int best_trial = -1;
  std::vector<Trial> trials;
};

// The i-th weight tuple drawn uniformly from the spec's ranges; one seeded stream.
std::vector<LossWeights> sample_weights(const SearchSpec& spec);

// Mean of abstract-level Label+Rationale F1 and sentence-level Selection+Label F1.
double tuning_objective(const MetricsReport& report);

struct ClaimSplit {
  std::vector<Claim> tune;
  std::vector<Claim> validation;
};

// Seeded shuffle, then the first tune_fraction for tuning and the next
// validation_fraction for scoring (each at least one claim).
ClaimSplit split_claims(const std::vector<Claim>& claims, const SearchSpec& spec);

// train_fn(weights) -> model; eval_fn(model) -> objective (higher is better).
// A trial whose train_fn or eval_fn throws is logged as failed; the search goes on.
template <typename TrainFn, typename EvalFn>
SearchResult search(TrainFn&& train_fn, EvalFn&& eval_fn, const SearchSpec& spec) {
  spec.validate();
  SearchResult result;
  const auto samples = sample_weights(spec);
  for (int i = 0; i < spec.trials; ++i) {
    Trial trial;
    trial.index = i;
    trial.weights = samples[static_cast<std::size_t>(i)];
    try {
      auto model = train_fn(trial.weights);
      trial.objective = eval_fn(model);
      trial.ok = true;
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
    if (trial.ok && (result.best_trial < 0 || trial.objective > result.best_objective)) {
      result.best_trial = i;
      result.best_objective = trial.objective;
      result.best = trial.weights;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

// One JSON line per trial: trial, lambda1..3, gamma, objective, status[, error].
void write_trial_log(std::ostream& out, const SearchResult& result);
std::string best_weights_json(const SearchResult& result, const SearchSpec& spec);

}  // namespace arsjoint
