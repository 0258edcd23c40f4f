#include <sstream>

#include <json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "arsjoint/cli.hpp"
#include "arsjoint/data.hpp"
#include "arsjoint/errors.hpp"
#include "arsjoint/eval.hpp"
#include "arsjoint/heads.hpp"
#include "arsjoint/loss.hpp"
#include "arsjoint/retrieval.hpp"
#include "arsjoint/train.hpp"

namespace py = pybind11;
using namespace arsjoint;

namespace {

template <typename T, typename Parse>
std::vector<T> parse_text(const std::string& text, Parse parse) {
  std::istringstream in(text);
  return parse(in);
}

py::dict evidence_dict(const Claim& c) {
  py::dict out;
  for (const auto& [doc, ev] : c.evidence) {
    out[py::int_(doc)] = py::make_tuple(ev.rationale_groups, std::string(stance_name(ev.stance)));
  }
  return out;
}

// Overrides are merged onto the defaults; unknown keys are rejected.
TrainConfig config_with(const std::string& overrides) {
  auto merged = nlohmann::json::parse(TrainConfig{}.to_json());
  if (!overrides.empty()) {
    const auto given = nlohmann::json::parse(overrides);
    for (const auto& [key, value] : given.items()) {
      if (!merged.contains(key)) throw ContractViolation("unknown config key: " + key);
      merged[key] = value;
    }
  }
  return TrainConfig::from_json(merged.dump());
}

// Retrieval candidates at k_tra, then labelled instances, then training.
TrainResult train_on(const std::vector<Document>& documents, const std::vector<Claim>& claims,
                     const std::string& config_json) {
  const auto config = config_with(config_json);
  config.validate();
  Corpus corpus(documents);
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);
  CandidateMap candidates;
  for (const auto& c : claims) candidates[c.claim_id] = index.topk(c.claim_id, c.text, config.k_tra).doc_ids();
  const auto instances = build_instances(claims, corpus, candidates, config.k_tra);
  if (instances.empty()) throw ValidationError("no training instances");
  py::gil_scoped_release release;
  return train(instances, claims, corpus, config);
}

std::string predictions_jsonl(const ModelCheckpoint& ckpt, const std::vector<Claim>& claims,
                              const std::vector<Document>& documents, int k_ret) {
  Corpus corpus(documents);
  HashedBowEmbedder embedder;
  RetrievalIndex index(corpus, embedder);
  std::vector<Prediction> preds;
  for (const auto& c : claims) preds.push_back(predict(ckpt, c, corpus, index, k_ret));
  std::ostringstream out;
  write_predictions(out, preds);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_arsjoint, m) {
  m.doc() = "Joint abstract retrieval, rationale selection and stance prediction";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<Document>(m, "Document")
      .def(py::init([](DocId id, std::string title, std::vector<std::string> sentences) {
             return Document{id, std::move(title), std::move(sentences)};
           }),
           py::arg("doc_id"), py::arg("title"), py::arg("sentences"))
      .def_readwrite("doc_id", &Document::doc_id)
      .def_readwrite("title", &Document::title)
      .def_readwrite("sentences", &Document::sentences)
      .def("__repr__", [](const Document& d) {
        return "<Document " + std::to_string(d.doc_id) + " with " + std::to_string(d.sentences.size()) +
               " sentences>";
      });

  py::class_<Claim>(m, "Claim")
      .def_readonly("claim_id", &Claim::claim_id)
      .def_readonly("text", &Claim::text)
      .def_readonly("cited_doc_ids", &Claim::cited_doc_ids)
      .def_property_readonly("evidence", &evidence_dict)
      .def("__repr__", [](const Claim& c) { return "<Claim " + std::to_string(c.claim_id) + ">"; });

  m.def("load_corpus", &load_corpus, py::arg("path"));
  m.def("load_claims", &load_claims, py::arg("path"));
  m.def("parse_corpus", [](const std::string& text) { return parse_text<Document>(text, parse_corpus); },
        py::arg("text"));
  m.def("parse_claims", [](const std::string& text) { return parse_text<Claim>(text, parse_claims); },
        py::arg("text"));

  m.def("tokenize", &word_tokens, py::arg("text"));
  m.def(
      "retrieve",
      [](const std::vector<Document>& documents, const std::string& claim_text, int k, std::size_t dim) {
        Claim claim;
        claim.text = claim_text;
        std::vector<std::pair<DocId, double>> out;
        for (const auto& s : topk_candidates(claim, Corpus(documents), HashedBowEmbedder(dim), k).ranked) {
          out.emplace_back(s.doc_id, s.score);
        }
        return out;
      },
      py::arg("documents"), py::arg("claim"), py::arg("k"), py::arg("dim") = HashedBowEmbedder::kDefaultDim);

  m.def("sample_probability", &sample_probability, py::arg("epoch"), py::arg("total_epochs"));
  m.def("rr_divergence", py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(&rr_divergence),
        py::arg("p"), py::arg("q"));
  m.def("rr_loss", py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(&rr_loss), py::arg("alphas"),
        py::arg("rationale_probs"));
  m.def(
      "joint_loss",
      [](double ret, double rat, double sta, double rr, double l1, double l2, double l3, double gamma) {
        return joint_loss(ret, rat, sta, rr, LossWeights{l1, l2, l3, gamma}).total;
      },
      py::arg("retrieval"), py::arg("rationale"), py::arg("stance"), py::arg("rr"), py::arg("lambda1") = 0.2,
      py::arg("lambda2") = 12.0, py::arg("lambda3") = 1.1, py::arg("gamma") = 1.9);

  py::class_<ModelCheckpoint>(m, "Model")
      .def_static("load", &ModelCheckpoint::load, py::arg("path"))
      .def("save", &ModelCheckpoint::save, py::arg("path"))
      .def_property_readonly("config_json", [](const ModelCheckpoint& c) { return c.config.to_json(); })
      .def(
          "predict_jsonl",
          [](const ModelCheckpoint& c, const std::vector<Claim>& claims, const std::vector<Document>& documents,
             int k_ret) { return predictions_jsonl(c, claims, documents, k_ret); },
          py::arg("claims"), py::arg("documents"), py::arg("k_ret") = 30);

  m.def(
      "train",
      [](const std::vector<Document>& documents, const std::vector<Claim>& claims, const std::string& config_json) {
        auto result = train_on(documents, claims, config_json);
        std::vector<std::string> history;
        for (const auto& e : result.history) history.push_back(to_json_line(e));
        return py::make_tuple(std::move(result.checkpoint), history);
      },
      py::arg("documents"), py::arg("claims"), py::arg("config_json") = "");

  m.def(
      "evaluate_jsonl",
      [](const std::string& predictions, const std::vector<Claim>& gold) {
        std::istringstream in(predictions);
        return evaluate(parse_predictions(in), gold).to_json();
      },
      py::arg("predictions"), py::arg("gold"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
