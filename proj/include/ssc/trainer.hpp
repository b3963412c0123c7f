#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssc/corpus.hpp"
#include "ssc/crf.hpp"
#include "ssc/encoder.hpp"
#include "ssc/heads.hpp"
#include "ssc/params.hpp"
#include "ssc/seqpack.hpp"

namespace ssc {

enum class ModelKind { Joint, ClsBaseline, ClsCrf };
enum class TaskKind { Classify, Summarize };

std::string to_string(ModelKind kind);
std::string to_string(TaskKind task);
ModelKind model_kind_from(const std::string& name);
TaskKind task_kind_from(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::Joint;
  TaskKind task = TaskKind::Classify;
  EncoderConfig encoder;
  std::size_t head_hidden = 0;  // 0 = encoder hidden_dim
  std::size_t bisect_threshold = 10;
  std::size_t baseline_split = 30;
  /// Classify on a per-sentence leading [CLS] token instead of the trailing
  /// [SEP] (joint model packing variant).
  bool sentence_cls_tokens = false;
  /// Contextualizing transformer layer over sentence vectors (baselines).
  bool context_layer = true;
  /// Append each sentence's abstract-overlap score to its vector
  /// (summarization only).
  bool abstract_rouge = false;
  std::vector<std::string> labels;

  void validate() const;
};

/// A model is its spec plus every learnable tensor.
struct Model {
  ModelSpec spec;
  EncoderParams encoder;
  FeedForwardHead head;
  std::optional<ClsBaselineParams> context;
  std::optional<CrfParams> crf;

  static Model init(const ModelSpec& spec, Rng& rng);
  /// Stable name -> tensor registry (checkpoint and optimizer order).
  ParamSet params() const;
};

/// One training/evaluation instance: a packed split of one document.
struct Example {
  std::size_t doc_index = 0;
  SentenceRange range;
  PackedInput packed;                       // joint input
  std::vector<PackedInput> sentence_packs;  // baseline inputs
  std::vector<std::size_t> label_ids;       // classification gold
  std::vector<double> targets;              // regression gold
  std::vector<double> feature;              // abstract-overlap values

  std::size_t n_sentences() const { return range.size(); }
};

std::vector<Example> build_examples(const std::vector<Document>& docs,
                                    const ModelSpec& spec, const Vocab& vocab,
                                    const LabelSet& labels);

/// Scalar training loss of one example (mean cross-entropy, mean squared
/// error, or per-sentence-normalized CRF negative log-likelihood).
Tensor forward_loss(Tape& tape, const Model& model, const Example& example,
                    bool training, Rng* rng);

std::vector<std::size_t> predict_labels(const Model& model,
                                        const Example& example);
std::vector<double> predict_scores(const Model& model, const Example& example);

std::vector<std::size_t> predict_document_labels(const Model& model,
                                                 const Document& doc,
                                                 const Vocab& vocab);
std::vector<double> predict_document_scores(const Model& model,
                                            const Document& doc,
                                            const Vocab& vocab);

double evaluate_micro_f1(const Model& model, const std::vector<Document>& docs,
                         const Vocab& vocab, const LabelSet& labels);
/// Mean per-sentence squared error against gold scores (computed from
/// highlights when a document carries none).
double evaluate_mse(const Model& model, const std::vector<Document>& docs,
                    const Vocab& vocab);

struct TrainConfig {
  double learning_rate = 2e-5;
  std::size_t epochs = 3;
  double dropout = 0.1;
  std::size_t micro_batch = 8;
  std::size_t effective_batch = 32;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::size_t step_count = 0;

  static AdamState init(const ParamSet& params);
};

/// One bias-corrected Adam update from the gradients currently stored in the
/// parameter tensors. Gradients are left in place for the caller to clear.
void adam_step(ParamSet& params, AdamState& state, double learning_rate,
               const TrainConfig& config);

struct StepStats {
  double loss = 0.0;  // full-batch loss this step optimized
  std::size_t examples = 0;
};

/// Splits `batch` into micro-batches of config.micro_batch, accumulates the
/// scaled gradients of each, and applies exactly one optimizer step, so the
/// update equals a single step on the whole batch.
StepStats accumulate_and_step(const Model& model, ParamSet& params,
                              AdamState& state,
                              const std::vector<const Example*>& batch,
                              const TrainConfig& config, Rng* dropout_rng);

struct EpochLog {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double best_dev = 0.0;
  std::size_t best_epoch = 0;
  double test_metric = 0.0;
};

struct TrainResult {
  std::vector<SeedResult> per_seed;
  double mean_test = 0.0;
  std::uint64_t selected_seed = 0;
  Model model;  // best-dev checkpoint across seeds
  std::vector<EpochLog> logs;
  double initial_dev_metric = 0.0;  // first seed, before any update
  LabelSet labels;
};

/// Per seed: trains, evaluates dev each epoch, keeps the best-dev
/// checkpoint, and reports the test metric of that checkpoint. Classification
/// reports the mean across seeds; the returned model is the best-dev
/// checkpoint over all seeds. One JSON object per epoch goes to `log`.
TrainResult train(const CorpusSplit& corpus, ModelSpec spec,
                  const TrainConfig& config, const Vocab& vocab,
                  std::ostream* log);

/// Runs train() once per learning rate and keeps the rate whose mean dev
/// metric is best.
TrainResult train_grid(const CorpusSplit& corpus, const ModelSpec& spec,
                       const TrainConfig& config,
                       const std::vector<double>& learning_rates,
                       const Vocab& vocab, std::ostream* log,
                       double* best_learning_rate = nullptr);

/// Checkpoint directory: model.json (spec + labels), vocab.txt, and the
/// tensor manifest/blobs.
void save_model(const std::string& dir, const Model& model,
                const Vocab& vocab);
struct LoadedModel {
  Model model;
  Vocab vocab;
};
LoadedModel load_model(const std::string& dir);

}  // namespace ssc
