#include "ssc/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ssc/seqpack.hpp"

namespace ssc {

double micro_f1(const std::vector<LabeledPair>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("micro_f1: empty prediction list");
  }
  // Pooled counts: every miss is one false positive for the predicted label
  // and one false negative for the gold label.
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const LabeledPair& p : pairs) {
    if (p.gold == p.pred) {
      ++tp;
    } else {
      ++fp;
      ++fn;
    }
  }
  const double denom = 2.0 * static_cast<double>(tp) +
                       static_cast<double>(fp) + static_cast<double>(fn);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(tp) / denom;
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0 || n == 0) return 0;
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
  if (reference.empty()) {
    throw std::invalid_argument("rouge_l: empty reference");
  }
  if (candidate.empty()) {
    return {};
  }
  const double l = static_cast<double>(lcs_length(candidate, reference));
  RougeScore s;
  s.precision = l / static_cast<double>(candidate.size());
  s.recall = l / static_cast<double>(reference.size());
  // beta = 1: 2PR/(P+R) == 2*LCS/(|cand|+|ref|), division done once
  s.f = 2.0 * l / static_cast<double>(candidate.size() + reference.size());
  return s;
}

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("rouge_n: n must be at least 1");
  }
  auto ngrams = [n](const std::vector<std::string>& toks) {
    std::map<std::vector<std::string>, std::size_t> grams;
    if (toks.size() >= n) {
      for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::vector<std::string> g(toks.begin() + i, toks.begin() + i + n);
        ++grams[std::move(g)];
      }
    }
    return grams;
  };
  const auto cand = ngrams(candidate);
  const auto ref = ngrams(reference);
  std::size_t cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [g, c] : cand) cand_total += c;
  for (const auto& [g, c] : ref) {
    ref_total += c;
    auto it = cand.find(g);
    if (it != cand.end()) {
      overlap += std::min(c, it->second);
    }
  }
  RougeScore s;
  if (cand_total > 0) s.precision = double(overlap) / double(cand_total);
  if (ref_total > 0) s.recall = double(overlap) / double(ref_total);
  if (cand_total + ref_total > 0) {
    s.f = 2.0 * double(overlap) / double(cand_total + ref_total);
  }
  return s;
}

namespace {

std::vector<std::string> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<std::string> out;
  for (const std::string& t : texts) {
    std::vector<std::string> toks = tokenize(t);
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

}  // namespace

std::vector<double> sentence_targets(
    const std::vector<std::string>& sentences,
    const std::vector<std::string>& highlights) {
  if (highlights.empty()) {
    throw std::invalid_argument("sentence_targets: no highlights");
  }
  const std::vector<std::string> ref = tokenize_all(highlights);
  std::vector<double> targets;
  targets.reserve(sentences.size());
  for (const std::string& sentence : sentences) {
    const std::vector<std::string> cand = tokenize(sentence);
    targets.push_back(cand.empty() ? 0.0 : rouge_l(cand, ref).f);
  }
  return targets;
}

double abstract_rouge(const std::string& sentence,
                      const std::vector<std::string>& abstract) {
  if (abstract.empty()) {
    throw std::invalid_argument("abstract_rouge: empty abstract");
  }
  const std::vector<std::string> cand = tokenize(sentence);
  if (cand.empty()) return 0.0;
  return rouge_l(cand, tokenize_all(abstract)).f;
}

}  // namespace ssc
