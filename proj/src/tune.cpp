#include "arsjoint/tune.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "arsjoint/errors.hpp"

namespace arsjoint {

void SearchSpec::validate() const {
  require(trials >= 1, "search needs at least one trial");
  for (const auto& range : ranges) require(range.low <= range.high, "empty weight range");
  require(tune_fraction > 0 && validation_fraction > 0 && tune_fraction + validation_fraction <= 1.0,
          "split fractions must be positive and sum to at most 1");
}

std::vector<LossWeights> sample_weights(const SearchSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<LossWeights> samples;
  samples.reserve(static_cast<std::size_t>(std::max(spec.trials, 0)));
  for (int i = 0; i < spec.trials; ++i) {
    std::array<double, 4> w{};
    for (std::size_t k = 0; k < 4; ++k) {
      std::uniform_real_distribution<double> dist(spec.ranges[k].low, spec.ranges[k].high);
      w[k] = dist(rng);
    }
    samples.push_back({w[0], w[1], w[2], w[3]});
  }
  return samples;
}

double tuning_objective(const MetricsReport& report) {
  return 0.5 * (report.label_rationale.f1 + report.selection_label.f1);
}

ClaimSplit split_claims(const std::vector<Claim>& claims, const SearchSpec& spec) {
  spec.validate();
  require(claims.size() >= 2, "split_claims: need at least two claims");
  std::vector<std::size_t> order(claims.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<double>(claims.size());
  auto tune_n = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(n * spec.tune_fraction)));
  auto val_n =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::round(n * spec.validation_fraction)));
  tune_n = std::min(tune_n, claims.size() - 1);
  val_n = std::min(val_n, claims.size() - tune_n);

  ClaimSplit split;
  for (std::size_t i = 0; i < tune_n; ++i) split.tune.push_back(claims[order[i]]);
  for (std::size_t i = tune_n; i < tune_n + val_n; ++i) split.validation.push_back(claims[order[i]]);
  return split;
}

void write_trial_log(std::ostream& out, const SearchResult& result) {
  for (const auto& trial : result.trials) {
    nlohmann::json j = {{"trial", trial.index},
                        {"lambda1", trial.weights.lambda1},
                        {"lambda2", trial.weights.lambda2},
                        {"lambda3", trial.weights.lambda3},
                        {"gamma", trial.weights.gamma},
                        {"objective", trial.ok ? nlohmann::json(trial.objective) : nlohmann::json()},
                        {"status", trial.ok ? "ok" : "failed"}};
    if (!trial.ok) j["error"] = trial.error;
    out << j.dump() << '\n';
  }
}

std::string best_weights_json(const SearchResult& result, const SearchSpec& spec) {
  nlohmann::json j = {{"trial", result.best_trial},
                      {"lambda1", result.best.lambda1},
                      {"lambda2", result.best.lambda2},
                      {"lambda3", result.best.lambda3},
                      {"gamma", result.best.gamma},
                      {"objective", result.best_objective},
                      {"objective_definition", spec.objective}};
  return j.dump(2);
}

}  // namespace arsjoint
