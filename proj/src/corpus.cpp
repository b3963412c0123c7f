#include "ssc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ssc/error.hpp"
#include "ssc/metrics.hpp"
#include "ssc/rng.hpp"

namespace ssc {

using json = nlohmann::ordered_json;

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], i).second) {
      throw std::invalid_argument("LabelSet: duplicate label '" + names_[i] +
                                  "'");
    }
  }
}

LabelSet LabelSet::from_documents(const std::vector<Document>& docs) {
  std::set<std::string> seen;
  for (const Document& doc : docs) {
    seen.insert(doc.labels.begin(), doc.labels.end());
  }
  return LabelSet(std::vector<std::string>(seen.begin(), seen.end()));
}

std::size_t LabelSet::id(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) {
    throw DataError("unknown label '" + name + "'");
  }
  return it->second;
}

bool LabelSet::contains(const std::string& name) const {
  return ids_.count(name) != 0;
}

const std::string& LabelSet::name(std::size_t id) const {
  if (id >= names_.size()) {
    throw std::out_of_range("LabelSet::name: id out of range");
  }
  return names_[id];
}

std::vector<Document> load_rct(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open dataset: " + path);
  }
  std::vector<Document> docs;
  Document current;
  bool open = false;
  auto close_doc = [&](std::size_t line_no) {
    if (!open) return;
    if (current.sentences.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": document '" +
                      current.doc_id + "' has no sentences");
    }
    docs.push_back(std::move(current));
    current = Document{};
    open = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      close_doc(line_no);
      continue;
    }
    if (line.rfind("###", 0) == 0) {
      close_doc(line_no);
      current.doc_id = line.substr(3);
      open = true;
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected LABEL<TAB>sentence");
    }
    if (!open) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": sentence line outside any document block");
    }
    current.labels.push_back(line.substr(0, tab));
    current.sentences.push_back(line.substr(tab + 1));
  }
  close_doc(line_no + 1);
  return docs;
}

namespace {

std::vector<std::string> string_array(const json& j, const char* field,
                                      const std::string& where) {
  std::vector<std::string> out;
  if (!j.contains(field)) return out;
  if (!j[field].is_array()) {
    throw DataError(where + ": field '" + field + "' must be an array");
  }
  for (const auto& v : j[field]) {
    if (!v.is_string()) {
      throw DataError(where + ": field '" + field + "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<Document> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open dataset: " + path);
  }
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    Document doc;
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) {
      throw DataError(where + ": missing string field 'doc_id'");
    }
    doc.doc_id = j["doc_id"].get<std::string>();
    doc.sentences = string_array(j, "sentences", where);
    if (doc.sentences.empty()) {
      throw DataError(where + ": document has no sentences");
    }
    doc.labels = string_array(j, "labels", where);
    if (!doc.labels.empty() && doc.labels.size() != doc.sentences.size()) {
      throw DataError(where + ": labels do not align with sentences (" +
                      std::to_string(doc.labels.size()) + " vs " +
                      std::to_string(doc.sentences.size()) + ")");
    }
    if (j.contains("scores")) {
      if (!j["scores"].is_array()) {
        throw DataError(where + ": field 'scores' must be an array");
      }
      for (const auto& v : j["scores"]) {
        if (!v.is_number()) {
          throw DataError(where + ": field 'scores' must hold numbers");
        }
        doc.scores.push_back(v.get<double>());
      }
      if (doc.scores.size() != doc.sentences.size()) {
        throw DataError(where + ": scores do not align with sentences");
      }
    }
    if (!doc.labels.empty() && !doc.scores.empty()) {
      throw DataError(where + ": document carries both labels and scores");
    }
    if (j.contains("confidence")) {
      if (!j["confidence"].is_number()) {
        throw DataError(where + ": field 'confidence' must be a number");
      }
      doc.confidence = j["confidence"].get<double>();
    }
    doc.highlights = string_array(j, "highlights", where);
    doc.abstract = string_array(j, "abstract", where);
    docs.push_back(std::move(doc));
  }
  return docs;
}

void save_jsonl(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write dataset: " + path);
  }
  for (const Document& doc : docs) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["sentences"] = doc.sentences;
    if (!doc.labels.empty()) j["labels"] = doc.labels;
    if (!doc.scores.empty()) j["scores"] = doc.scores;
    if (doc.confidence) j["confidence"] = *doc.confidence;
    if (!doc.highlights.empty()) j["highlights"] = doc.highlights;
    if (!doc.abstract.empty()) j["abstract"] = doc.abstract;
    out << j.dump() << '\n';
  }
}

std::set<std::string> qualify(const std::map<std::string, double>& accuracies,
                              double threshold) {
  std::set<std::string> kept;
  for (const auto& [worker, accuracy] : accuracies) {
    if (accuracy >= threshold) {
      kept.insert(worker);
    }
  }
  return kept;
}

AggregateResult aggregate(const std::vector<Vote>& votes,
                          const std::map<std::string, double>& accuracies,
                          const LabelSet& labels) {
  if (votes.empty()) {
    throw DataError("aggregate: no votes");
  }
  std::vector<double> scores(labels.size(), 0.0);
  double total = 0.0;
  for (const Vote& vote : votes) {
    auto it = accuracies.find(vote.worker);
    if (it == accuracies.end()) {
      throw DataError("aggregate: worker '" + vote.worker +
                      "' has no recorded accuracy");
    }
    const std::size_t l = labels.id(vote.label);
    scores[l] += it->second;
    total += it->second;
  }
  if (total <= 0.0) {
    throw DataError("aggregate: vote weights sum to zero");
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < scores.size(); ++l) {
    if (scores[l] > scores[best]) {  // strict: ties keep the earlier label
      best = l;
    }
  }
  return {labels.name(best), scores[best] / total};
}

CorpusSplit split_by_confidence(std::vector<Document> docs,
                                std::array<double, 3> fractions,
                                std::uint64_t seed) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_by_confidence: fractions must sum to 1");
  }
  for (const Document& doc : docs) {
    if (!doc.confidence) {
      throw DataError("split_by_confidence: document '" + doc.doc_id +
                      "' has no confidence");
    }
  }
  const std::size_t n = docs.size();
  // Shares by floor with train absorbing the remainder; the test share rounds
  // up instead (it must not starve at small corpus sizes) and that extra
  // document comes out of dev's share.
  const auto floor_share = [n](double f) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f));
  };
  const std::size_t test_floor = floor_share(fractions[2]);
  const std::size_t n_test =
      std::min(n, static_cast<std::size_t>(
                      std::ceil(static_cast<double>(n) * fractions[2])));
  const std::size_t dev_floor = floor_share(fractions[1]);
  const std::size_t borrowed = n_test - test_floor;
  const std::size_t n_dev =
      std::min(n - n_test, dev_floor > borrowed ? dev_floor - borrowed : 0);

  // highest confidence first; stable on ties so input order decides
  std::stable_sort(docs.begin(), docs.end(),
                   [](const Document& a, const Document& b) {
                     return *a.confidence > *b.confidence;
                   });
  CorpusSplit split;
  split.test.assign(docs.begin(), docs.begin() + n_test);
  std::vector<Document> pool(docs.begin() + n_test, docs.end());
  Rng rng(seed);
  rng.shuffle(pool);
  split.dev.assign(pool.begin(), pool.begin() + n_dev);
  split.train.assign(pool.begin() + n_dev, pool.end());
  return split;
}

namespace {

const std::vector<std::string>& distractor_pool() {
  static const std::vector<std::string> pool = [] {
    std::vector<std::string> p;
    for (int i = 0; i < 20; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "filler%02d", i);
      p.emplace_back(buf);
    }
    return p;
  }();
  return pool;
}

std::string cue_sentence(Rng& rng, const std::string& cue) {
  const auto& pool = distractor_pool();
  const std::size_t n_words = 3 + rng.next_below(5);          // 3..7 fillers
  const std::size_t cue_at = rng.next_below(n_words + 1);     // cue slot
  std::string sentence;
  for (std::size_t w = 0; w <= n_words; ++w) {
    if (!sentence.empty()) sentence += ' ';
    if (w == cue_at) {
      sentence += cue;
    } else {
      sentence += pool[rng.next_below(pool.size())];
    }
  }
  return sentence;
}

}  // namespace

std::vector<Document> gen_synthetic(std::uint64_t seed, std::size_t n_docs,
                                    std::size_t sentences_per_doc) {
  if (sentences_per_doc < 2) {
    throw std::invalid_argument("gen_synthetic: need at least 2 sentences");
  }
  static const std::vector<std::string> cues = {"alpha", "beta"};
  Rng rng(seed);
  std::vector<Document> docs;
  docs.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    Document doc;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "syn-%06zu", d);
    doc.doc_id = buf;
    std::vector<std::size_t> cue_ids(sentences_per_doc);
    for (std::size_t s = 0; s < sentences_per_doc; ++s) {
      cue_ids[s] = rng.next_below(2);
      doc.sentences.push_back(cue_sentence(rng, cues[cue_ids[s]]));
      // label = previous sentence's cue; first sentence keys on itself
      doc.labels.push_back(cues[cue_ids[s == 0 ? 0 : s - 1]]);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> gen_synthetic_summ(std::uint64_t seed,
                                         std::size_t n_docs,
                                         std::size_t sentences_per_doc,
                                         std::size_t n_highlights) {
  if (sentences_per_doc < 2 || n_highlights == 0 ||
      n_highlights >= sentences_per_doc) {
    throw std::invalid_argument(
        "gen_synthetic_summ: need 0 < highlights < sentences_per_doc >= 2");
  }
  // body and highlight sentences come from disjoint pools, so the score a
  // sentence earns against the highlights is learnable from its surface
  std::vector<std::string> body_pool, key_pool;
  for (int i = 0; i < 30; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "body%02d", i);
    body_pool.emplace_back(buf);
  }
  for (int i = 0; i < 10; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "key%02d", i);
    key_pool.emplace_back(buf);
  }
  auto make_sentence = [](Rng& rng, const std::vector<std::string>& pool,
                          std::size_t n_words) {
    std::string s;
    for (std::size_t w = 0; w < n_words; ++w) {
      if (!s.empty()) s += ' ';
      s += pool[rng.next_below(pool.size())];
    }
    return s;
  };

  Rng rng(seed);
  std::vector<Document> docs;
  docs.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    Document doc;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sum-%06zu", d);
    doc.doc_id = buf;

    std::vector<std::size_t> slots(sentences_per_doc);
    std::iota(slots.begin(), slots.end(), 0);
    rng.shuffle(slots);
    std::set<std::size_t> highlight_at(slots.begin(),
                                       slots.begin() + n_highlights);
    for (std::size_t s = 0; s < sentences_per_doc; ++s) {
      const bool is_highlight = highlight_at.count(s) != 0;
      const std::size_t n_words = 5 + rng.next_below(4);
      doc.sentences.push_back(
          make_sentence(rng, is_highlight ? key_pool : body_pool, n_words));
      if (is_highlight) {
        doc.highlights.push_back(doc.sentences.back());
      }
    }
    // abstract: highlight-flavored text, used by the abstract-overlap feature
    for (std::size_t a = 0; a < 2; ++a) {
      doc.abstract.push_back(
          make_sentence(rng, key_pool, 6 + rng.next_below(3)));
    }
    doc.scores = sentence_targets(doc.sentences, doc.highlights);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace ssc
