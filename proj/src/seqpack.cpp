#include "ssc/seqpack.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

#include "ssc/error.hpp"

namespace ssc {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&]() {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (ch < 0x80 && std::ispunct(ch)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(ch));
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return tokens;
}

Vocab::Vocab() {
  append("[PAD]");
  append("[UNK]");
  append("[CLS]");
  append("[SEP]");
}

void Vocab::append(const std::string& token) {
  ids_.emplace(token, tokens_.size());
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<Document>& corpus, std::size_t cap) {
  if (cap <= kReserved) {
    throw std::invalid_argument("Vocab::build: cap must exceed " +
                                std::to_string(kReserved));
  }
  std::map<std::string, std::size_t> counts;
  for (const Document& doc : corpus) {
    for (const std::string& sentence : doc.sentences) {
      for (const std::string& tok : tokenize(sentence)) {
        ++counts[tok];
      }
    }
  }
  // order: count descending, then token ascending (map iteration is already
  // lexicographic, and stable_sort keeps it for equal counts)
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  Vocab vocab;
  const std::size_t keep = std::min(ranked.size(), cap - kReserved);
  for (std::size_t i = 0; i < keep; ++i) {
    vocab.append(ranked[i].first);
  }
  return vocab;
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw std::out_of_range("Vocab::token: id " + std::to_string(id) +
                            " out of range");
  }
  return tokens_[id];
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write vocabulary file: " + path);
  }
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\n';
  }
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open vocabulary file: " + path);
  }
  Vocab vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": empty vocabulary line");
    }
    if (vocab.ids_.count(line)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": duplicate token '" + line + "'");
    }
    vocab.append(line);
  }
  return vocab;
}

namespace {

void bisect_into(std::size_t begin, std::size_t end, std::size_t threshold,
                 std::vector<SentenceRange>& out) {
  const std::size_t len = end - begin;
  if (len <= threshold) {
    out.push_back({begin, end});
    return;
  }
  const std::size_t first_half = (len + 1) / 2;  // first half gets the extra
  bisect_into(begin, begin + first_half, threshold, out);
  bisect_into(begin + first_half, end, threshold, out);
}

}  // namespace

std::vector<SentenceRange> bisect_split(std::size_t n_sentences,
                                        std::size_t threshold) {
  if (n_sentences == 0) {
    throw std::invalid_argument("bisect_split: document has no sentences");
  }
  if (threshold == 0) {
    throw std::invalid_argument("bisect_split: threshold must be positive");
  }
  std::vector<SentenceRange> out;
  bisect_into(0, n_sentences, threshold, out);
  return out;
}

PackedInput pack(const std::vector<std::string>& sentences,
                 SentenceRange range, const Vocab& vocab,
                 const PackOptions& options) {
  if (range.begin >= range.end || range.end > sentences.size()) {
    throw std::invalid_argument("pack: sentence range out of bounds");
  }
  const std::size_t n = range.size();
  std::vector<std::vector<std::size_t>> sentence_ids(n);
  std::size_t body_total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (const std::string& tok : tokenize(sentences[range.begin + k])) {
      sentence_ids[k].push_back(vocab.id(tok));
    }
    if (sentence_ids[k].empty()) {
      throw DataError("pack: sentence " + std::to_string(range.begin + k) +
                      " has no tokens");
    }
    body_total += sentence_ids[k].size();
  }

  // [CLS], one [SEP] per sentence, plus a per-sentence [CLS] when requested
  const std::size_t overhead = 1 + n + (options.sentence_cls ? n : 0);
  if (overhead + n > options.max_tokens) {
    throw DataError("pack: too many sentences for the token budget");
  }
  const std::size_t budget = options.max_tokens - overhead;
  if (body_total > budget) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t len = sentence_ids[k].size();
      const std::size_t allowed = (len * budget) / body_total;
      if (allowed == 0) {
        throw DataError("pack: sentence " + std::to_string(range.begin + k) +
                        " truncated to zero tokens");
      }
      sentence_ids[k].resize(allowed);
    }
  }

  PackedInput packed;
  packed.range = range;
  packed.token_ids.push_back(Vocab::kCls);
  for (std::size_t k = 0; k < n; ++k) {
    if (options.sentence_cls) {
      packed.cls_positions.push_back(packed.token_ids.size());
      packed.token_ids.push_back(Vocab::kCls);
    }
    packed.token_ids.insert(packed.token_ids.end(), sentence_ids[k].begin(),
                            sentence_ids[k].end());
    packed.sep_positions.push_back(packed.token_ids.size());
    packed.token_ids.push_back(Vocab::kSep);
  }
  packed.attention_mask.assign(packed.token_ids.size(), 1);
  return packed;
}

PackedInput pack(const Document& doc, SentenceRange range, const Vocab& vocab,
                 const PackOptions& options) {
  return pack(doc.sentences, range, vocab, options);
}

}  // namespace ssc
