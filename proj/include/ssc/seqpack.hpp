#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssc/document.hpp"

namespace ssc {

/// Lowercasing word-level tokenizer: whitespace-delimited, with every ASCII
/// punctuation character split off as its own token.
std::vector<std::string> tokenize(std::string_view text);

/// Token table with four reserved entries at fixed ids.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kCls = 2;
  static constexpr std::size_t kSep = 3;
  static constexpr std::size_t kReserved = 4;

  Vocab();

  /// Most frequent cap-4 corpus tokens plus the reserved entries.
  /// Frequency ties break lexicographically (smaller string kept).
  static Vocab build(const std::vector<Document>& corpus, std::size_t cap);

  /// Id for a token; unseen tokens map to [UNK].
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const;
  std::size_t size() const { return tokens_.size(); }

  /// One token per line; line number = id - 4. UTF-8, LF.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  void append(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const SentenceRange&) const = default;
};

/// Contiguous ranges covering [0, n), each of length <= threshold, obtained
/// by halving (first half gets the extra sentence) until short enough.
std::vector<SentenceRange> bisect_split(std::size_t n_sentences,
                                        std::size_t threshold);

struct PackOptions {
  std::size_t max_tokens = 512;
  /// Also insert a per-sentence [CLS] token and record its position, for
  /// classifying sentences on a leading token instead of the trailing [SEP].
  bool sentence_cls = false;
};

/// Token-id sequence [CLS] s_a [SEP] s_a+1 [SEP] ... [SEP] for one range of
/// a document's sentences, with the delimiter positions that map back to
/// sentences.
struct PackedInput {
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> sep_positions;   // one per sentence, ascending
  std::vector<std::size_t> cls_positions;   // filled when sentence_cls is set
  SentenceRange range;
  std::vector<std::uint8_t> attention_mask; // 1 = real token

  std::size_t size() const { return token_ids.size(); }
  std::size_t n_sentences() const { return sep_positions.size(); }
};

/// Packs sentences[range] into one delimited sequence. When the result would
/// exceed max_tokens, sentence tails are cut back proportionally (delimiters
/// are never dropped). A sentence with no tokens left is an error.
PackedInput pack(const std::vector<std::string>& sentences, SentenceRange range,
                 const Vocab& vocab, const PackOptions& options = {});

PackedInput pack(const Document& doc, SentenceRange range, const Vocab& vocab,
                 const PackOptions& options = {});

/// Concatenates per-split predictions back into document order.
template <class T>
std::vector<T> unpack(const std::vector<std::vector<T>>& split_predictions,
                      const std::vector<SentenceRange>& splits) {
  if (split_predictions.size() != splits.size()) {
    throw std::invalid_argument("unpack: split count mismatch");
  }
  std::vector<T> merged;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (split_predictions[i].size() != splits[i].size()) {
      throw std::invalid_argument(
          "unpack: predictions for split " + std::to_string(i) + " hold " +
          std::to_string(split_predictions[i].size()) + " entries, expected " +
          std::to_string(splits[i].size()));
    }
    merged.insert(merged.end(), split_predictions[i].begin(),
                  split_predictions[i].end());
  }
  return merged;
}

}  // namespace ssc
