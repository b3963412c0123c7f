#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssc/document.hpp"

namespace ssc {

/// Ordered label names; the order fixes label ids and every tie-break.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  /// Sorted unique label names found in the documents.
  static LabelSet from_documents(const std::vector<Document>& docs);

  std::size_t id(const std::string& name) const;  // throws DataError
  bool contains(const std::string& name) const;
  const std::string& name(std::size_t id) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> ids_;
};

/// PubMed-RCT style text: "###<doc_id>" header lines, "LABEL<TAB>sentence"
/// body lines, blank line ends a document.
std::vector<Document> load_rct(const std::string& path);

/// One JSON object per line:
/// {"doc_id": str, "sentences": [str], "labels": [str]?, "scores": [num]?,
///  "confidence": num?, "highlights": [str]?, "abstract": [str]?}
std::vector<Document> load_jsonl(const std::string& path);
void save_jsonl(const std::string& path, const std::vector<Document>& docs);

/// Workers whose accuracy reaches the threshold ("less than" disqualifies,
/// so the boundary is inclusive).
std::set<std::string> qualify(const std::map<std::string, double>& accuracies,
                              double threshold = 0.75);

struct Vote {
  std::string worker;
  std::string label;
};

struct AggregateResult {
  std::string label;
  double confidence = 0.0;
};

/// Accuracy-weighted plurality: each label's score is the summed accuracy of
/// its voters; ties break by LabelSet order; confidence is the winning score
/// over the total score.
AggregateResult aggregate(const std::vector<Vote>& votes,
                          const std::map<std::string, double>& accuracies,
                          const LabelSet& labels);

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
};

/// Confidence-ordered split: the test partition takes the highest-confidence
/// documents (its share rounds up, at dev's expense), the rest is shuffled
/// with the given seed and divided with every leftover document going to
/// train. Documents must carry a confidence value.
CorpusSplit split_by_confidence(std::vector<Document> docs,
                                std::array<double, 3> fractions,
                                std::uint64_t seed);

/// Labeled corpus where sentence i's label is the cue word (alpha/beta) of
/// sentence i-1 (sentence 0 is labeled by its own cue), so sentences after
/// the first cannot be classified in isolation above chance.
std::vector<Document> gen_synthetic(std::uint64_t seed, std::size_t n_docs,
                                    std::size_t sentences_per_doc);

/// Scored corpus for extraction: a few planted highlight sentences per
/// document (drawn from a distinct token pool) plus body sentences; scores
/// are rouge_l targets against the concatenated highlights and an abstract
/// paraphrasing the highlights is attached.
std::vector<Document> gen_synthetic_summ(std::uint64_t seed,
                                         std::size_t n_docs,
                                         std::size_t sentences_per_doc,
                                         std::size_t n_highlights);

}  // namespace ssc
