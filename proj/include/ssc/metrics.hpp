#pragma once

#include <string>
#include <vector>

namespace ssc {

struct LabeledPair {
  std::size_t gold = 0;
  std::size_t pred = 0;
};

/// Micro-averaged F1 from pooled TP/FP/FN counts. For single-label
/// multiclass predictions this reduces to plain accuracy, bit for bit.
double micro_f1(const std::vector<LabeledPair>& pairs);

/// Longest common subsequence length, dynamic programming.
std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// LCS-based overlap: recall = LCS/|reference|, precision = LCS/|candidate|,
/// F is the beta=1 harmonic mean (computed as 2*LCS/(|cand|+|ref|)).
/// An empty candidate scores zero.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

/// Clipped n-gram overlap; the recall is the headline number.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, std::size_t n);

/// Per-sentence regression targets: rouge_l F of each sentence against the
/// concatenated highlights. Tokenization matches the model tokenizer.
std::vector<double> sentence_targets(
    const std::vector<std::string>& sentences,
    const std::vector<std::string>& highlights);

/// rouge_l F of one sentence against the concatenated abstract.
double abstract_rouge(const std::string& sentence,
                      const std::vector<std::string>& abstract);

}  // namespace ssc
