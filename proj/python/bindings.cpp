#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ssc/cli.hpp"
#include "ssc/corpus.hpp"
#include "ssc/crf.hpp"
#include "ssc/metrics.hpp"
#include "ssc/seqpack.hpp"
#include "ssc/tensor.hpp"

namespace py = pybind11;
using namespace ssc;

namespace {

Tensor matrix_from(const std::vector<std::vector<double>>& rows,
                   const char* what) {
  if (rows.empty() || rows[0].empty()) {
    throw std::invalid_argument(std::string(what) + ": empty matrix");
  }
  const std::size_t cols = rows[0].size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) {
      throw std::invalid_argument(std::string(what) + ": ragged matrix");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Tensor::from_data({rows.size(), cols}, std::move(flat));
}

CrfParams params_from(const std::vector<std::vector<double>>& transitions,
                      const std::vector<double>& start,
                      const std::vector<double>& end) {
  CrfParams p;
  p.transitions = matrix_from(transitions, "transitions");
  p.start = Tensor::from_data({start.size()}, start);
  p.end = Tensor::from_data({end.size()}, end);
  return p;
}

py::dict packed_to_dict(const PackedInput& packed) {
  py::dict d;
  d["token_ids"] = packed.token_ids;
  d["sep_positions"] = packed.sep_positions;
  d["cls_positions"] = packed.cls_positions;
  d["range"] = py::make_tuple(packed.range.begin, packed.range.end);
  d["attention_mask"] = packed.attention_mask;
  return d;
}

py::dict doc_to_dict(const Document& doc) {
  py::dict d;
  d["doc_id"] = doc.doc_id;
  d["sentences"] = doc.sentences;
  if (!doc.labels.empty()) d["labels"] = doc.labels;
  if (!doc.scores.empty()) d["scores"] = doc.scores;
  if (doc.confidence) d["confidence"] = *doc.confidence;
  if (!doc.highlights.empty()) d["highlights"] = doc.highlights;
  if (!doc.abstract.empty()) d["abstract"] = doc.abstract;
  return d;
}

py::dict rouge_to_dict(const RougeScore& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f"] = s.f;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential sentence classification toolkit (native core)";

  m.def("tokenize", [](const std::string& text) { return tokenize(text); },
        py::arg("text"),
        "Lowercasing word tokenizer with punctuation split off");

  py::class_<Vocab>(m, "Vocab")
      .def_static(
          "build",
          [](const std::vector<std::vector<std::string>>& corpus,
             std::size_t cap) {
            std::vector<Document> docs;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
              Document doc;
              doc.doc_id = std::to_string(i);
              doc.sentences = corpus[i];
              docs.push_back(std::move(doc));
            }
            return Vocab::build(docs, cap);
          },
          py::arg("corpus"), py::arg("cap"),
          "Most frequent cap-4 tokens over a list of sentence lists")
      .def_static("load", &Vocab::load, py::arg("path"))
      .def("save", &Vocab::save, py::arg("path"))
      .def("id", &Vocab::id, py::arg("token"))
      .def("token", &Vocab::token, py::arg("id"))
      .def("__len__", &Vocab::size);

  m.def(
      "bisect_split",
      [](std::size_t n_sentences, std::size_t threshold) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const SentenceRange& r : bisect_split(n_sentences, threshold)) {
          out.emplace_back(r.begin, r.end);
        }
        return out;
      },
      py::arg("n_sentences"), py::arg("threshold"),
      "Recursive halving into ranges of at most `threshold` sentences");

  m.def(
      "pack",
      [](const std::vector<std::string>& sentences, const Vocab& vocab,
         std::size_t max_tokens, bool sentence_cls) {
        PackOptions options;
        options.max_tokens = max_tokens;
        options.sentence_cls = sentence_cls;
        return packed_to_dict(
            pack(sentences, {0, sentences.size()}, vocab, options));
      },
      py::arg("sentences"), py::arg("vocab"), py::arg("max_tokens") = 512,
      py::arg("sentence_cls") = false,
      "Delimited token-id sequence for a list of sentences");

  m.def("lcs_length", &lcs_length, py::arg("a"), py::arg("b"));
  m.def(
      "rouge_l",
      [](const std::vector<std::string>& candidate,
         const std::vector<std::string>& reference) {
        return rouge_to_dict(rouge_l(candidate, reference));
      },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "rouge_n",
      [](const std::vector<std::string>& candidate,
         const std::vector<std::string>& reference, std::size_t n) {
        return rouge_to_dict(rouge_n(candidate, reference, n));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("n"));
  m.def(
      "micro_f1",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
        std::vector<LabeledPair> converted;
        converted.reserve(pairs.size());
        for (const auto& [gold, pred] : pairs) {
          converted.push_back({gold, pred});
        }
        return micro_f1(converted);
      },
      py::arg("pairs"), "Micro-averaged F1 over (gold, pred) index pairs");
  m.def("sentence_targets", &sentence_targets, py::arg("sentences"),
        py::arg("highlights"));
  m.def("abstract_rouge", &abstract_rouge, py::arg("sentence"),
        py::arg("abstract"));

  m.def(
      "crf_log_partition",
      [](const std::vector<std::vector<double>>& emissions,
         const std::vector<std::vector<double>>& transitions,
         const std::vector<double>& start, const std::vector<double>& end) {
        Tape tape(false);
        return crf_log_partition(tape, matrix_from(emissions, "emissions"),
                                 params_from(transitions, start, end))
            .value();
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("start"),
      py::arg("end"));
  m.def(
      "crf_nll",
      [](const std::vector<std::vector<double>>& emissions,
         const std::vector<std::vector<double>>& transitions,
         const std::vector<double>& start, const std::vector<double>& end,
         const std::vector<std::size_t>& gold) {
        Tape tape(false);
        return crf_nll(tape, matrix_from(emissions, "emissions"),
                       params_from(transitions, start, end), gold)
            .value();
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("start"),
      py::arg("end"), py::arg("gold"));
  m.def(
      "viterbi",
      [](const std::vector<std::vector<double>>& emissions,
         const std::vector<std::vector<double>>& transitions,
         const std::vector<double>& start, const std::vector<double>& end) {
        const ViterbiResult r = viterbi(emissions, transitions, start, end);
        return py::make_tuple(r.path, r.score);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("start"),
      py::arg("end"), "Best label path and its score");

  m.def("qualify", &qualify, py::arg("accuracies"),
        py::arg("threshold") = 0.75);
  m.def(
      "aggregate",
      [](const std::vector<std::pair<std::string, std::string>>& votes,
         const std::map<std::string, double>& accuracies,
         const std::vector<std::string>& labels) {
        std::vector<Vote> converted;
        converted.reserve(votes.size());
        for (const auto& [worker, label] : votes) {
          converted.push_back({worker, label});
        }
        const AggregateResult r =
            aggregate(converted, accuracies, LabelSet(labels));
        return py::make_tuple(r.label, r.confidence);
      },
      py::arg("votes"), py::arg("accuracies"), py::arg("labels"),
      "Accuracy-weighted plurality with ratio confidence");

  m.def(
      "gen_synthetic",
      [](std::uint64_t seed, std::size_t n_docs,
         std::size_t sentences_per_doc) {
        py::list out;
        for (const Document& doc :
             gen_synthetic(seed, n_docs, sentences_per_doc)) {
          out.append(doc_to_dict(doc));
        }
        return out;
      },
      py::arg("seed"), py::arg("n_docs"), py::arg("sentences_per_doc"));
  m.def(
      "gen_synthetic_summ",
      [](std::uint64_t seed, std::size_t n_docs,
         std::size_t sentences_per_doc, std::size_t n_highlights) {
        py::list out;
        for (const Document& doc : gen_synthetic_summ(
                 seed, n_docs, sentences_per_doc, n_highlights)) {
          out.append(doc_to_dict(doc));
        }
        return out;
      },
      py::arg("seed"), py::arg("n_docs"), py::arg("sentences_per_doc"),
      py::arg("n_highlights"));

  m.def(
      "gelu",
      [](const std::vector<double>& values) {
        Tape tape(false);
        return gelu(tape, Tensor::from_data({values.size()}, values)).data();
      },
      py::arg("values"), "Elementwise GELU (tanh approximation)");
  m.def(
      "softmax",
      [](const std::vector<double>& values) {
        Tape tape(false);
        return softmax(tape, Tensor::from_data({values.size()}, values), 0)
            .data();
      },
      py::arg("values"));

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "Invoke the command-line surface; returns (exit_code, stdout, stderr)");
}
