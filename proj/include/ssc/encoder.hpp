#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssc/params.hpp"
#include "ssc/rng.hpp"
#include "ssc/seqpack.hpp"
#include "ssc/tensor.hpp"

namespace ssc {

struct EncoderConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t hidden_dim = 32;
  std::size_t ff_dim = 64;
  std::size_t vocab_size = 0;
  std::size_t max_positions = 512;
  double dropout_rate = 0.1;

  std::size_t head_dim() const { return hidden_dim / num_heads; }
  void validate() const;
};

/// One self-attention + feedforward block (post-layer-norm residuals).
struct LayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor attn_gain, attn_bias;
  Tensor ff_w1, ff_b1, ff_w2, ff_b2;
  Tensor ff_gain, ff_bias;

  static LayerParams init(const EncoderConfig& config, Rng& rng);
  void collect(ParamSet& out, const std::string& prefix) const;
};

/// Token and learned absolute position embeddings plus the layer stack.
/// No segment embeddings: the delimiter tokens carry the boundary signal.
struct EncoderParams {
  EncoderConfig config;
  Tensor token_emb;  // [vocab x hidden]
  Tensor pos_emb;    // [max_positions x hidden]
  Tensor emb_gain, emb_bias;
  std::vector<LayerParams> layers;

  static EncoderParams init(const EncoderConfig& config, Rng& rng);
  void collect(ParamSet& out, const std::string& prefix) const;
};

/// Per-layer, per-head attention weight matrices ([T x T], row-major) for
/// one encoded input. Rows sum to 1 over unmasked columns; masked columns
/// carry exactly zero weight.
struct AttentionTrace {
  std::size_t seq_len = 0;
  std::size_t num_heads = 0;
  std::vector<std::vector<std::vector<double>>> layers;  // [layer][head][T*T]
};

/// Elementwise max across heads at one layer.
std::vector<double> max_over_heads(const AttentionTrace& trace,
                                   std::size_t layer);

struct EncodeResult {
  Tensor hidden;  // [T x hidden]
  std::optional<AttentionTrace> trace;
};

/// Contextualizes every token of the packed input. Padding positions
/// (attention_mask == 0) receive zero attention from real positions.
EncodeResult encode(Tape& tape, const PackedInput& input,
                    const EncoderParams& params, bool training, Rng* rng,
                    bool want_trace = false);

/// One transformer block applied to an explicit [T x hidden] input; exposed
/// for the sentence-vector contextualizing layer and for direct tests.
Tensor transformer_layer(Tape& tape, const Tensor& x, const LayerParams& layer,
                         const EncoderConfig& config,
                         const std::vector<std::uint8_t>& mask, bool training,
                         Rng* rng,
                         std::vector<std::vector<double>>* trace_heads);

}  // namespace ssc
