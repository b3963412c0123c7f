#pragma once

#include <optional>
#include <vector>

#include "ssc/encoder.hpp"
#include "ssc/params.hpp"
#include "ssc/tensor.hpp"

namespace ssc {

/// Two-layer feedforward head (GELU between layers, linear output).
struct FeedForwardHead {
  std::vector<std::pair<Tensor, Tensor>> layers;  // (weight, bias)

  static FeedForwardHead init(std::size_t in_dim, std::size_t hidden_dim,
                              std::size_t out_dim, Rng& rng);
  Tensor forward(Tape& tape, const Tensor& x) const;
  std::size_t in_dim() const { return layers.front().first.dim(0); }
  std::size_t out_dim() const { return layers.back().first.dim(1); }
  void collect(ParamSet& out, const std::string& prefix) const;
};

/// Logits for each sentence of a packed split, read off the delimiter-token
/// encodings at `positions`.
Tensor classify_joint(Tape& tape, const Tensor& hidden,
                      const std::vector<std::size_t>& positions,
                      const FeedForwardHead& head);

/// One score in [0, 1] per sentence (logistic-squashed regression). When an
/// extra per-sentence scalar feature is given it is concatenated to the
/// delimiter vector ahead of the first head layer.
Tensor score_regression(Tape& tape, const Tensor& hidden,
                        const std::vector<std::size_t>& positions,
                        const FeedForwardHead& head,
                        const std::vector<double>* extra_feature);

/// Params of the sentence-vector contextualizer used by the independent
/// per-sentence baseline: one transformer layer over the [CLS] vectors plus
/// learned sentence-index embeddings that give the layer order information.
struct ClsBaselineParams {
  LayerParams context_layer;
  Tensor sentence_pos_emb;  // [max_sentences x hidden]

  static ClsBaselineParams init(const EncoderConfig& config,
                                std::size_t max_sentences, Rng& rng);
  void collect(ParamSet& out, const std::string& prefix) const;
};

/// Encodes each sentence independently ([CLS] tokens [SEP]), takes the [CLS]
/// vector of each, optionally contextualizes the stack with one transformer
/// layer, and returns the [n x hidden] sentence matrix.
Tensor cls_sentence_vectors(Tape& tape,
                            const std::vector<PackedInput>& sentence_packs,
                            const EncoderParams& encoder,
                            const ClsBaselineParams* context, bool training,
                            Rng* rng);

/// Full per-sentence baseline: sentence vectors followed by the head.
Tensor classify_cls_baseline(Tape& tape,
                             const std::vector<PackedInput>& sentence_packs,
                             const EncoderParams& encoder,
                             const ClsBaselineParams* context,
                             const FeedForwardHead& head, bool training,
                             Rng* rng);

}  // namespace ssc
