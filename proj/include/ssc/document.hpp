#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ssc {

/// One document: ordered sentences plus whatever supervision the task has.
/// Classification documents carry one label name per sentence; summarization
/// documents carry one score per sentence and, for evaluation and feature
/// extraction, reference highlights and the abstract text.
struct Document {
  std::string doc_id;
  std::vector<std::string> sentences;
  std::vector<std::string> labels;    // empty when unlabeled
  std::vector<double> scores;         // empty when unscored
  std::optional<double> confidence;
  std::vector<std::string> highlights;
  std::vector<std::string> abstract;

  bool has_labels() const { return !labels.empty(); }
  bool has_scores() const { return !scores.empty(); }
};

}  // namespace ssc
