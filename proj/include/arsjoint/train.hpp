#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "arsjoint/data.hpp"
#include "arsjoint/encoder.hpp"
#include "arsjoint/loss.hpp"
#include "arsjoint/model.hpp"
#include "arsjoint/retrieval.hpp"

namespace arsjoint {

struct TrainConfig {
  LossWeights weights;
  double lr_encoder = 1e-5;  // lr1
  double lr_heads = 5e-6;    // lr2
  int epochs = 20;
  int k_tra = 12;
  int k_ret = 30;
  int max_len = 512;
  int dim = 64;
  int layers = 2;
  std::uint64_t seed = 13;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
  bool operator==(const TrainConfig&) const = default;
};

// Adam with one learning rate for enc.* parameters and another for the rest.
// Entries whose gradient is exactly zero are left untouched.
class Adam {
 public:
  Adam(double lr_encoder, double lr_heads, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(ParameterMap& params);
  long steps() const { return step_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  double lr_encoder_, lr_heads_, beta1_, beta2_, epsilon_;
  long step_ = 0;
  std::map<std::string, Moments> moments_;
};

struct ModelCheckpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  ParameterMap params;
  TrainConfig config;
  Vocabulary vocab;
  std::uint32_t version = kFormatVersion;

  void write(std::ostream& out) const;
  static ModelCheckpoint read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static ModelCheckpoint load(const std::filesystem::path& path);
};

struct EpochLog {
  int epoch = 0;
  double p_sample = 0.0;
  LossBreakdown mean;  // averaged over the epoch's instances
  int estimated_count = 0;
};

std::string to_json_line(const EpochLog& log);

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<EpochLog> history;
};

// Vocabulary over every claim, title and abstract sentence, in input order.
Vocabulary build_vocabulary(const std::vector<Claim>& claims, const Corpus& corpus);

// Batch size 1; scheduled sampling draws one Bernoulli(p_sample) per instance
// per epoch from a stream keyed by (seed, epoch, instance index).
// Epoch logs are streamed to `log` as JSON lines when it is non-null.
TrainResult train(const std::vector<LabeledInstance>& instances, const std::vector<Claim>& claims,
                  const Corpus& corpus, const TrainConfig& config, std::ostream* log = nullptr);

// Same, with a fixed vocabulary (e.g. one shared across tuning trials).
TrainResult train(const std::vector<LabeledInstance>& instances, const std::vector<Claim>& claims,
                  const Corpus& corpus, const TrainConfig& config, Vocabulary vocab,
                  std::ostream* log = nullptr);

// Uniform draw in [0, 1) for one instance's scheduled-sampling decision.
double sampling_draw(std::uint64_t seed, int epoch, std::size_t instance_index);

struct AbstractPrediction {
  DocId doc_id = 0;
  bool relevant = false;               // p_b[1] > p_b[0]
  std::vector<int> rationale_indices;  // estimated S^r, may be empty
  Stance stance = Stance::kNoInfo;     // argmax p_e
  double relevance = 0.0;              // p_b[1]

  // Relevant and not NOINFO: the abstract is reported for the claim.
  bool reported() const { return relevant && stance != Stance::kNoInfo; }
};

struct Prediction {
  ClaimId claim_id = 0;
  std::vector<AbstractPrediction> abstracts;
};

AbstractPrediction predict_abstract(const ModelCheckpoint& checkpoint, std::string_view claim_text,
                                    const Document& doc);
Prediction predict(const ModelCheckpoint& checkpoint, const Claim& claim, const Corpus& corpus,
                   const RetrievalIndex& index, int k_ret);
Prediction predict(const ModelCheckpoint& checkpoint, const Claim& claim, const Corpus& corpus,
                   const Embedder& embedder, int k_ret);

// {id, evidence: {doc_id: {sentences, label}}} per claim; only reported abstracts are written.
void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> parse_predictions(std::istream& in);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

}  // namespace arsjoint
