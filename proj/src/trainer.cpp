#include "ssc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ssc/checkpoint.hpp"
#include "ssc/error.hpp"
#include "ssc/metrics.hpp"

namespace ssc {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Joint: return "joint";
    case ModelKind::ClsBaseline: return "cls-baseline";
    case ModelKind::ClsCrf: return "cls-crf";
  }
  return "?";
}

std::string to_string(TaskKind task) {
  return task == TaskKind::Classify ? "classify" : "summarize";
}

ModelKind model_kind_from(const std::string& name) {
  if (name == "joint") return ModelKind::Joint;
  if (name == "cls-baseline") return ModelKind::ClsBaseline;
  if (name == "cls-crf") return ModelKind::ClsCrf;
  throw UsageError("unknown model '" + name +
                   "' (expected joint, cls-baseline or cls-crf)");
}

TaskKind task_kind_from(const std::string& name) {
  if (name == "classify") return TaskKind::Classify;
  if (name == "summarize") return TaskKind::Summarize;
  throw UsageError("unknown task '" + name +
                   "' (expected classify or summarize)");
}

void ModelSpec::validate() const {
  encoder.validate();
  if (kind == ModelKind::ClsCrf && task == TaskKind::Summarize) {
    throw UsageError("the CRF baseline is classification-only");
  }
  if (task == TaskKind::Classify && labels.size() < 2) {
    throw std::invalid_argument("classification needs at least two labels");
  }
  if (abstract_rouge && task != TaskKind::Summarize) {
    throw UsageError("the abstract-overlap feature applies to summarization");
  }
  if (bisect_threshold == 0 || baseline_split == 0) {
    throw std::invalid_argument("split thresholds must be positive");
  }
}

Model Model::init(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model model;
  model.spec = spec;
  model.encoder = EncoderParams::init(spec.encoder, rng);
  const std::size_t hidden = spec.encoder.hidden_dim;
  const std::size_t head_hidden = spec.head_hidden ? spec.head_hidden : hidden;
  const bool regression = spec.task == TaskKind::Summarize;
  const std::size_t in_dim = hidden + (spec.abstract_rouge ? 1 : 0);
  const std::size_t out_dim = regression ? 1 : spec.labels.size();
  model.head = FeedForwardHead::init(in_dim, head_hidden, out_dim, rng);
  if (spec.kind != ModelKind::Joint && spec.context_layer) {
    model.context =
        ClsBaselineParams::init(spec.encoder, spec.baseline_split, rng);
  }
  if (spec.kind == ModelKind::ClsCrf) {
    model.crf = CrfParams::init(spec.labels.size());
  }
  return model;
}

ParamSet Model::params() const {
  ParamSet set;
  encoder.collect(set, "encoder");
  head.collect(set, "head");
  if (context) {
    context->collect(set, "baseline");
  }
  if (crf) {
    set.add("crf.transitions", crf->transitions);
    set.add("crf.start", crf->start);
    set.add("crf.end", crf->end);
  }
  return set;
}

// ---- examples ---------------------------------------------------------------

std::vector<Example> build_examples(const std::vector<Document>& docs,
                                    const ModelSpec& spec, const Vocab& vocab,
                                    const LabelSet& labels) {
  const bool joint = spec.kind == ModelKind::Joint;
  const std::size_t threshold =
      joint ? spec.bisect_threshold : spec.baseline_split;
  PackOptions joint_options;
  joint_options.max_tokens = spec.encoder.max_positions;
  joint_options.sentence_cls = spec.sentence_cls_tokens;
  PackOptions sentence_options;
  sentence_options.max_tokens = spec.encoder.max_positions;

  std::vector<Example> examples;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    if (doc.sentences.empty()) {
      throw DataError("document '" + doc.doc_id + "' has no sentences");
    }
    std::vector<double> doc_targets;
    if (spec.task == TaskKind::Summarize) {
      if (doc.has_scores()) {
        doc_targets = doc.scores;
      } else if (!doc.highlights.empty()) {
        doc_targets = sentence_targets(doc.sentences, doc.highlights);
      }
    }
    std::vector<double> doc_feature;
    if (spec.abstract_rouge) {
      if (doc.abstract.empty()) {
        throw DataError("document '" + doc.doc_id +
                        "' has no abstract for the abstract-overlap feature");
      }
      for (const std::string& sentence : doc.sentences) {
        doc_feature.push_back(abstract_rouge(sentence, doc.abstract));
      }
    }

    for (const SentenceRange& range :
         bisect_split(doc.sentences.size(), threshold)) {
      Example ex;
      ex.doc_index = d;
      ex.range = range;
      if (joint) {
        ex.packed = pack(doc, range, vocab, joint_options);
      } else {
        for (std::size_t s = range.begin; s < range.end; ++s) {
          ex.sentence_packs.push_back(
              pack(doc, {s, s + 1}, vocab, sentence_options));
        }
      }
      if (spec.task == TaskKind::Classify && doc.has_labels()) {
        for (std::size_t s = range.begin; s < range.end; ++s) {
          ex.label_ids.push_back(labels.id(doc.labels[s]));
        }
      }
      if (!doc_targets.empty()) {
        ex.targets.assign(doc_targets.begin() + range.begin,
                          doc_targets.begin() + range.end);
      }
      if (!doc_feature.empty()) {
        ex.feature.assign(doc_feature.begin() + range.begin,
                          doc_feature.begin() + range.end);
      }
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

namespace {

std::vector<std::size_t> iota_positions(std::size_t n) {
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  return positions;
}

/// Sentence-representation matrix [n x hidden] for one example.
Tensor sentence_matrix(Tape& tape, const Model& model, const Example& example,
                       bool training, Rng* rng) {
  if (model.spec.kind == ModelKind::Joint) {
    Tensor hidden =
        encode(tape, example.packed, model.encoder, training, rng).hidden;
    const auto& positions = model.spec.sentence_cls_tokens
                                ? example.packed.cls_positions
                                : example.packed.sep_positions;
    return gather_rows(tape, hidden, positions);
  }
  return cls_sentence_vectors(tape, example.sentence_packs, model.encoder,
                              model.context ? &*model.context : nullptr,
                              training, rng);
}

Tensor example_logits(Tape& tape, const Model& model, const Example& example,
                      bool training, Rng* rng) {
  return model.head.forward(
      tape, sentence_matrix(tape, model, example, training, rng));
}

Tensor example_scores(Tape& tape, const Model& model, const Example& example,
                      bool training, Rng* rng) {
  Tensor matrix = sentence_matrix(tape, model, example, training, rng);
  return score_regression(tape, matrix, iota_positions(matrix.dim(0)),
                          model.head,
                          example.feature.empty() ? nullptr : &example.feature);
}

std::size_t argmax_row(const Tensor& logits, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.dim(1); ++j) {
    if (logits.at(row, j) > logits.at(row, best)) {  // ties keep lower id
      best = j;
    }
  }
  return best;
}

}  // namespace

Tensor forward_loss(Tape& tape, const Model& model, const Example& example,
                    bool training, Rng* rng) {
  if (model.spec.task == TaskKind::Classify) {
    if (example.label_ids.size() != example.n_sentences()) {
      throw DataError("example lacks gold labels for training");
    }
    Tensor logits = example_logits(tape, model, example, training, rng);
    if (model.crf) {
      Tensor nll = crf_nll(tape, logits, *model.crf, example.label_ids);
      // normalized per sentence so chunks of different length mix in a batch
      return mul_scalar(tape, nll,
                        1.0 / static_cast<double>(example.n_sentences()));
    }
    return cross_entropy(tape, logits, example.label_ids);
  }
  if (example.targets.size() != example.n_sentences()) {
    throw DataError("example lacks gold scores for training");
  }
  Tensor scores = example_scores(tape, model, example, training, rng);
  return mse(tape, scores, example.targets);
}

std::vector<std::size_t> predict_labels(const Model& model,
                                        const Example& example) {
  Tape tape(false);
  Tensor logits = example_logits(tape, model, example, false, nullptr);
  if (model.crf) {
    return viterbi(logits, *model.crf).path;
  }
  std::vector<std::size_t> out(logits.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = argmax_row(logits, i);
  }
  return out;
}

std::vector<double> predict_scores(const Model& model, const Example& example) {
  Tape tape(false);
  Tensor scores = example_scores(tape, model, example, false, nullptr);
  return scores.data();
}

namespace {

std::vector<Example> document_examples(const Model& model, const Document& doc,
                                       const Vocab& vocab) {
  const LabelSet labels = model.spec.task == TaskKind::Classify
                              ? LabelSet(model.spec.labels)
                              : LabelSet();
  return build_examples({doc}, model.spec, vocab, labels);
}

}  // namespace

std::vector<std::size_t> predict_document_labels(const Model& model,
                                                 const Document& doc,
                                                 const Vocab& vocab) {
  std::vector<std::vector<std::size_t>> parts;
  std::vector<SentenceRange> splits;
  for (const Example& ex : document_examples(model, doc, vocab)) {
    splits.push_back(ex.range);
    parts.push_back(predict_labels(model, ex));
  }
  return unpack(parts, splits);
}

std::vector<double> predict_document_scores(const Model& model,
                                            const Document& doc,
                                            const Vocab& vocab) {
  std::vector<std::vector<double>> parts;
  std::vector<SentenceRange> splits;
  for (const Example& ex : document_examples(model, doc, vocab)) {
    splits.push_back(ex.range);
    parts.push_back(predict_scores(model, ex));
  }
  return unpack(parts, splits);
}

double evaluate_micro_f1(const Model& model, const std::vector<Document>& docs,
                         const Vocab& vocab, const LabelSet& labels) {
  std::vector<LabeledPair> pairs;
  for (const Document& doc : docs) {
    if (!doc.has_labels()) {
      throw DataError("document '" + doc.doc_id + "' has no gold labels");
    }
    const std::vector<std::size_t> pred =
        predict_document_labels(model, doc, vocab);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      pairs.push_back({labels.id(doc.labels[s]), pred[s]});
    }
  }
  return micro_f1(pairs);
}

double evaluate_mse(const Model& model, const std::vector<Document>& docs,
                    const Vocab& vocab) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Document& doc : docs) {
    std::vector<double> gold;
    if (doc.has_scores()) {
      gold = doc.scores;
    } else if (!doc.highlights.empty()) {
      gold = sentence_targets(doc.sentences, doc.highlights);
    } else {
      throw DataError("document '" + doc.doc_id +
                      "' has neither scores nor highlights");
    }
    const std::vector<double> pred =
        predict_document_scores(model, doc, vocab);
    for (std::size_t s = 0; s < gold.size(); ++s) {
      const double d = pred[s] - gold[s];
      total += d * d;
    }
    count += gold.size();
  }
  if (count == 0) {
    throw DataError("no sentences to evaluate");
  }
  return total / static_cast<double>(count);
}

// ---- optimization -----------------------------------------------------------

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (epochs == 0) {
    throw std::invalid_argument("epochs must be at least 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (micro_batch == 0 || effective_batch == 0 ||
      effective_batch % micro_batch != 0) {
    throw std::invalid_argument(
        "effective_batch must be a positive multiple of micro_batch");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("at least one seed is required");
  }
}

AdamState AdamState::init(const ParamSet& params) {
  AdamState state;
  for (const auto& [name, tensor] : params) {
    state.m.emplace_back(tensor.numel(), 0.0);
    state.v.emplace_back(tensor.numel(), 0.0);
  }
  return state;
}

void adam_step(ParamSet& params, AdamState& state, double learning_rate,
               const TrainConfig& config) {
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state does not match parameters");
  }
  ++state.step_count;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double bc1 =
      1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double bc2 =
      1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor tensor = params.at(i).second;  // shared storage
    std::vector<double>& value = tensor.data();
    std::vector<double>& grad = tensor.grad();
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    if (m.size() != value.size()) {
      throw std::invalid_argument("adam_step: moment shape mismatch at '" +
                                  params.at(i).first + "'");
    }
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
  }
}

StepStats accumulate_and_step(const Model& model, ParamSet& params,
                              AdamState& state,
                              const std::vector<const Example*>& batch,
                              const TrainConfig& config, Rng* dropout_rng) {
  if (batch.empty()) {
    throw std::invalid_argument("accumulate_and_step: empty batch");
  }
  const double batch_size = static_cast<double>(batch.size());
  StepStats stats;
  for (std::size_t begin = 0; begin < batch.size();
       begin += config.micro_batch) {
    const std::size_t end =
        std::min(batch.size(), begin + config.micro_batch);
    Tape tape;
    Tensor group_loss;
    for (std::size_t i = begin; i < end; ++i) {
      Tensor loss =
          forward_loss(tape, model, *batch[i], /*training=*/true, dropout_rng);
      group_loss = group_loss.defined() ? add(tape, group_loss, loss) : loss;
    }
    // each group carries summed losses; 1/batch turns the run into one
    // full-batch mean step
    Tensor scaled = mul_scalar(tape, group_loss, 1.0 / batch_size);
    if (!std::isfinite(scaled.value())) {
      throw TrainError("non-finite loss");
    }
    stats.loss += scaled.value();
    tape.backward(scaled);
  }
  stats.examples = batch.size();
  adam_step(params, state, config.learning_rate, config);
  params.zero_grads();
  return stats;
}

// ---- training loop ----------------------------------------------------------

namespace {

double dev_metric(const Model& model, const std::vector<Document>& docs,
                  const Vocab& vocab, const LabelSet& labels) {
  if (model.spec.task == TaskKind::Classify) {
    return evaluate_micro_f1(model, docs, vocab, labels);
  }
  return evaluate_mse(model, docs, vocab);
}

bool better_metric(TaskKind task, double candidate, double incumbent) {
  // classification maximizes micro-F1, summarization minimizes MSE
  return task == TaskKind::Classify ? candidate > incumbent
                                    : candidate < incumbent;
}

}  // namespace

TrainResult train(const CorpusSplit& corpus, ModelSpec spec,
                  const TrainConfig& config, const Vocab& vocab,
                  std::ostream* log) {
  config.validate();
  spec.encoder.dropout_rate = config.dropout;
  if (spec.task == TaskKind::Classify && spec.labels.empty()) {
    std::vector<Document> all = corpus.train;
    all.insert(all.end(), corpus.dev.begin(), corpus.dev.end());
    all.insert(all.end(), corpus.test.begin(), corpus.test.end());
    spec.labels = LabelSet::from_documents(all).names();
  }
  spec.validate();
  if (corpus.train.empty() || corpus.dev.empty() || corpus.test.empty()) {
    throw DataError("train/dev/test splits must all be non-empty");
  }
  const LabelSet labels = spec.task == TaskKind::Classify
                              ? LabelSet(spec.labels)
                              : LabelSet();

  const std::vector<Example> train_examples =
      build_examples(corpus.train, spec, vocab, labels);
  if (train_examples.empty()) {
    throw DataError("no training examples");
  }

  TrainResult result;
  result.labels = labels;
  const double worst = spec.task == TaskKind::Classify
                           ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
  double selected_dev = worst;
  std::vector<std::vector<double>> selected_snapshot;

  for (std::size_t si = 0; si < config.seeds.size(); ++si) {
    const std::uint64_t seed = config.seeds[si];
    Rng master(seed);
    Rng init_rng = master.fork(0);
    Rng dropout_rng = master.fork(1);
    Rng shuffle_rng = master.fork(2);

    Model model = Model::init(spec, init_rng);
    ParamSet params = model.params();
    AdamState adam = AdamState::init(params);

    if (si == 0) {
      result.initial_dev_metric = dev_metric(model, corpus.dev, vocab, labels);
    }

    std::vector<std::size_t> order(train_examples.size());
    std::iota(order.begin(), order.end(), 0);

    double best_dev = worst;
    std::size_t best_epoch = 0;
    std::vector<std::vector<double>> best_snapshot = params.snapshot_values();
    std::size_t global_step = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      std::size_t example_count = 0;
      for (std::size_t begin = 0; begin < order.size();
           begin += config.effective_batch) {
        const std::size_t end =
            std::min(order.size(), begin + config.effective_batch);
        std::vector<const Example*> batch;
        batch.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          batch.push_back(&train_examples[order[i]]);
        }
        ++global_step;
        try {
          const StepStats stats = accumulate_and_step(model, params, adam,
                                                      batch, config,
                                                      &dropout_rng);
          loss_sum += stats.loss * static_cast<double>(stats.examples);
          example_count += stats.examples;
        } catch (const TrainError& e) {
          throw TrainError(std::string(e.what()) + " at optimizer step " +
                           std::to_string(global_step) + " (seed " +
                           std::to_string(seed) + ", epoch " +
                           std::to_string(epoch) + ")");
        }
      }
      const double train_loss =
          loss_sum / static_cast<double>(example_count);
      const double dev = dev_metric(model, corpus.dev, vocab, labels);
      result.logs.push_back({seed, epoch, train_loss, dev});
      if (log != nullptr) {
        json line;
        line["seed"] = seed;
        line["epoch"] = epoch;
        line["train_loss"] = train_loss;
        line["dev_metric"] = dev;
        (*log) << line.dump() << '\n';
      }
      if (better_metric(spec.task, dev, best_dev)) {
        best_dev = dev;
        best_epoch = epoch;
        best_snapshot = params.snapshot_values();
      }
    }

    params.restore_values(best_snapshot);
    const double test = spec.task == TaskKind::Classify
                            ? evaluate_micro_f1(model, corpus.test, vocab,
                                                labels)
                            : evaluate_mse(model, corpus.test, vocab);
    result.per_seed.push_back({seed, best_dev, best_epoch, test});
    if (better_metric(spec.task, best_dev, selected_dev)) {
      selected_dev = best_dev;
      result.selected_seed = seed;
      selected_snapshot = std::move(best_snapshot);
    }
  }

  if (spec.task == TaskKind::Classify) {
    double total = 0.0;
    for (const SeedResult& r : result.per_seed) total += r.test_metric;
    result.mean_test = total / static_cast<double>(result.per_seed.size());
  } else {
    // single best-on-dev model, no averaging
    for (const SeedResult& r : result.per_seed) {
      if (r.seed == result.selected_seed) result.mean_test = r.test_metric;
    }
  }

  Rng rebuild_rng(0);
  result.model = Model::init(spec, rebuild_rng);
  ParamSet selected_params = result.model.params();
  selected_params.restore_values(selected_snapshot);
  return result;
}

TrainResult train_grid(const CorpusSplit& corpus, const ModelSpec& spec,
                       const TrainConfig& config,
                       const std::vector<double>& learning_rates,
                       const Vocab& vocab, std::ostream* log,
                       double* best_learning_rate) {
  if (learning_rates.empty()) {
    throw std::invalid_argument("train_grid: empty learning-rate grid");
  }
  std::optional<TrainResult> best;
  double best_lr = learning_rates.front();
  double best_mean_dev = 0.0;
  for (double lr : learning_rates) {
    TrainConfig c = config;
    c.learning_rate = lr;
    TrainResult r = train(corpus, spec, c, vocab, log);
    double mean_dev = 0.0;
    for (const SeedResult& s : r.per_seed) mean_dev += s.best_dev;
    mean_dev /= static_cast<double>(r.per_seed.size());
    if (!best || better_metric(spec.task, mean_dev, best_mean_dev)) {
      best = std::move(r);
      best_lr = lr;
      best_mean_dev = mean_dev;
    }
  }
  if (best_learning_rate != nullptr) {
    *best_learning_rate = best_lr;
  }
  return std::move(*best);
}

// ---- checkpoint I/O ----------------------------------------------------------

void save_model(const std::string& dir, const Model& model,
                const Vocab& vocab) {
  fs::create_directories(dir);
  json meta;
  meta["format"] = 1;
  meta["model"] = to_string(model.spec.kind);
  meta["task"] = to_string(model.spec.task);
  json enc;
  enc["num_layers"] = model.spec.encoder.num_layers;
  enc["num_heads"] = model.spec.encoder.num_heads;
  enc["hidden_dim"] = model.spec.encoder.hidden_dim;
  enc["ff_dim"] = model.spec.encoder.ff_dim;
  enc["vocab_size"] = model.spec.encoder.vocab_size;
  enc["max_positions"] = model.spec.encoder.max_positions;
  enc["dropout_rate"] = model.spec.encoder.dropout_rate;
  meta["encoder"] = enc;
  meta["head_hidden"] = model.spec.head_hidden;
  meta["bisect_threshold"] = model.spec.bisect_threshold;
  meta["baseline_split"] = model.spec.baseline_split;
  meta["sentence_cls_tokens"] = model.spec.sentence_cls_tokens;
  meta["context_layer"] = model.spec.context_layer;
  meta["abstract_rouge"] = model.spec.abstract_rouge;
  meta["labels"] = model.spec.labels;

  std::ofstream meta_out(fs::path(dir) / "model.json", std::ios::binary);
  if (!meta_out) {
    throw DataError("cannot write model metadata in " + dir);
  }
  meta_out << meta.dump(2) << '\n';
  vocab.save((fs::path(dir) / "vocab.txt").string());
  save_params(dir, model.params());
}

LoadedModel load_model(const std::string& dir) {
  std::ifstream meta_in(fs::path(dir) / "model.json", std::ios::binary);
  if (!meta_in) {
    throw DataError("cannot open model metadata in " + dir);
  }
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::parse_error& e) {
    throw DataError("model.json is not valid JSON: " + std::string(e.what()));
  }
  ModelSpec spec;
  spec.kind = model_kind_from(meta.at("model").get<std::string>());
  spec.task = task_kind_from(meta.at("task").get<std::string>());
  const json& enc = meta.at("encoder");
  spec.encoder.num_layers = enc.at("num_layers").get<std::size_t>();
  spec.encoder.num_heads = enc.at("num_heads").get<std::size_t>();
  spec.encoder.hidden_dim = enc.at("hidden_dim").get<std::size_t>();
  spec.encoder.ff_dim = enc.at("ff_dim").get<std::size_t>();
  spec.encoder.vocab_size = enc.at("vocab_size").get<std::size_t>();
  spec.encoder.max_positions = enc.at("max_positions").get<std::size_t>();
  spec.encoder.dropout_rate = enc.at("dropout_rate").get<double>();
  spec.head_hidden = meta.at("head_hidden").get<std::size_t>();
  spec.bisect_threshold = meta.at("bisect_threshold").get<std::size_t>();
  spec.baseline_split = meta.at("baseline_split").get<std::size_t>();
  spec.sentence_cls_tokens = meta.at("sentence_cls_tokens").get<bool>();
  spec.context_layer = meta.at("context_layer").get<bool>();
  spec.abstract_rouge = meta.at("abstract_rouge").get<bool>();
  spec.labels = meta.at("labels").get<std::vector<std::string>>();

  LoadedModel loaded;
  Rng rng(0);
  loaded.model = Model::init(spec, rng);
  ParamSet params = loaded.model.params();
  load_params_into(dir, params);
  loaded.vocab = Vocab::load((fs::path(dir) / "vocab.txt").string());
  if (loaded.vocab.size() != spec.encoder.vocab_size) {
    throw DataError("checkpoint vocabulary size does not match model");
  }
  return loaded;
}

}  // namespace ssc
