#include "ssc/encoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssc/error.hpp"

namespace ssc {

namespace {
constexpr double kInitStd = 0.02;
constexpr double kLayerNormEps = 1e-12;
}  // namespace

void EncoderConfig::validate() const {
  if (num_layers == 0 || num_heads == 0 || hidden_dim == 0 || ff_dim == 0) {
    throw std::invalid_argument("EncoderConfig: zero-sized dimension");
  }
  if (hidden_dim % num_heads != 0) {
    throw std::invalid_argument(
        "EncoderConfig: hidden_dim must be divisible by num_heads");
  }
  if (vocab_size <= Vocab::kReserved) {
    throw std::invalid_argument("EncoderConfig: vocab_size not set");
  }
  if (max_positions == 0) {
    throw std::invalid_argument("EncoderConfig: max_positions must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("EncoderConfig: dropout_rate must be in [0,1)");
  }
}

LayerParams LayerParams::init(const EncoderConfig& config, Rng& rng) {
  const std::size_t h = config.hidden_dim, f = config.ff_dim;
  LayerParams p;
  p.wq = Tensor::randn({h, h}, kInitStd, rng, true);
  p.bq = Tensor::zeros({h}, true);
  p.wk = Tensor::randn({h, h}, kInitStd, rng, true);
  p.bk = Tensor::zeros({h}, true);
  p.wv = Tensor::randn({h, h}, kInitStd, rng, true);
  p.bv = Tensor::zeros({h}, true);
  p.wo = Tensor::randn({h, h}, kInitStd, rng, true);
  p.bo = Tensor::zeros({h}, true);
  p.attn_gain = Tensor::full({h}, 1.0, true);
  p.attn_bias = Tensor::zeros({h}, true);
  p.ff_w1 = Tensor::randn({h, f}, kInitStd, rng, true);
  p.ff_b1 = Tensor::zeros({f}, true);
  p.ff_w2 = Tensor::randn({f, h}, kInitStd, rng, true);
  p.ff_b2 = Tensor::zeros({h}, true);
  p.ff_gain = Tensor::full({h}, 1.0, true);
  p.ff_bias = Tensor::zeros({h}, true);
  return p;
}

void LayerParams::collect(ParamSet& out, const std::string& prefix) const {
  out.add(prefix + ".attn.wq", wq);
  out.add(prefix + ".attn.bq", bq);
  out.add(prefix + ".attn.wk", wk);
  out.add(prefix + ".attn.bk", bk);
  out.add(prefix + ".attn.wv", wv);
  out.add(prefix + ".attn.bv", bv);
  out.add(prefix + ".attn.wo", wo);
  out.add(prefix + ".attn.bo", bo);
  out.add(prefix + ".attn_ln.gain", attn_gain);
  out.add(prefix + ".attn_ln.bias", attn_bias);
  out.add(prefix + ".ff.w1", ff_w1);
  out.add(prefix + ".ff.b1", ff_b1);
  out.add(prefix + ".ff.w2", ff_w2);
  out.add(prefix + ".ff.b2", ff_b2);
  out.add(prefix + ".ff_ln.gain", ff_gain);
  out.add(prefix + ".ff_ln.bias", ff_bias);
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  config.validate();
  EncoderParams p;
  p.config = config;
  p.token_emb =
      Tensor::randn({config.vocab_size, config.hidden_dim}, kInitStd, rng, true);
  p.pos_emb = Tensor::randn({config.max_positions, config.hidden_dim}, kInitStd,
                            rng, true);
  p.emb_gain = Tensor::full({config.hidden_dim}, 1.0, true);
  p.emb_bias = Tensor::zeros({config.hidden_dim}, true);
  p.layers.reserve(config.num_layers);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    p.layers.push_back(LayerParams::init(config, rng));
  }
  return p;
}

void EncoderParams::collect(ParamSet& out, const std::string& prefix) const {
  out.add(prefix + ".token_emb", token_emb);
  out.add(prefix + ".pos_emb", pos_emb);
  out.add(prefix + ".emb_ln.gain", emb_gain);
  out.add(prefix + ".emb_ln.bias", emb_bias);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].collect(out, prefix + ".layer" + std::to_string(l));
  }
}

std::vector<double> max_over_heads(const AttentionTrace& trace,
                                   std::size_t layer) {
  if (layer >= trace.layers.size()) {
    throw std::out_of_range("max_over_heads: layer " + std::to_string(layer) +
                            " out of range");
  }
  const auto& heads = trace.layers[layer];
  std::vector<double> out(trace.seq_len * trace.seq_len, 0.0);
  if (!heads.empty()) {
    out = heads[0];
    for (std::size_t h = 1; h < heads.size(); ++h) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(out[i], heads[h][i]);
      }
    }
  }
  return out;
}

Tensor transformer_layer(Tape& tape, const Tensor& x, const LayerParams& layer,
                         const EncoderConfig& config,
                         const std::vector<std::uint8_t>& mask, bool training,
                         Rng* rng,
                         std::vector<std::vector<double>>* trace_heads) {
  const std::size_t head_dim = config.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const double rate = config.dropout_rate;
  const bool use_dropout = training && rate > 0.0;
  if (use_dropout && rng == nullptr) {
    throw std::invalid_argument("transformer_layer: training needs an rng");
  }

  Tensor q = add_bias(tape, matmul(tape, x, layer.wq), layer.bq);
  Tensor k = add_bias(tape, matmul(tape, x, layer.wk), layer.bk);
  Tensor v = add_bias(tape, matmul(tape, x, layer.wv), layer.bv);

  std::vector<Tensor> head_outputs;
  head_outputs.reserve(config.num_heads);
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    Tensor qh = slice_cols(tape, q, h * head_dim, head_dim);
    Tensor kh = slice_cols(tape, k, h * head_dim, head_dim);
    Tensor vh = slice_cols(tape, v, h * head_dim, head_dim);
    Tensor scores =
        mul_scalar(tape, matmul(tape, qh, transpose(tape, kh)), scale);
    Tensor probs = masked_softmax_rows(tape, scores, mask);
    if (trace_heads != nullptr) {
      trace_heads->push_back(probs.data());
    }
    if (use_dropout) {
      probs = dropout(tape, probs, rate, training, *rng);
    }
    head_outputs.push_back(matmul(tape, probs, vh));
  }
  Tensor context = config.num_heads == 1 ? head_outputs[0]
                                         : concat_cols(tape, head_outputs);
  Tensor attn_out = add_bias(tape, matmul(tape, context, layer.wo), layer.bo);
  if (use_dropout) {
    attn_out = dropout(tape, attn_out, rate, training, *rng);
  }
  Tensor h1 = layer_norm(tape, add(tape, x, attn_out), layer.attn_gain,
                         layer.attn_bias, kLayerNormEps);

  Tensor ff = add_bias(tape, matmul(tape, h1, layer.ff_w1), layer.ff_b1);
  ff = gelu(tape, ff);
  ff = add_bias(tape, matmul(tape, ff, layer.ff_w2), layer.ff_b2);
  if (use_dropout) {
    ff = dropout(tape, ff, rate, training, *rng);
  }
  return layer_norm(tape, add(tape, h1, ff), layer.ff_gain, layer.ff_bias,
                    kLayerNormEps);
}

EncodeResult encode(Tape& tape, const PackedInput& input,
                    const EncoderParams& params, bool training, Rng* rng,
                    bool want_trace) {
  const EncoderConfig& config = params.config;
  const std::size_t t_len = input.token_ids.size();
  if (t_len == 0) {
    throw std::invalid_argument("encode: empty input");
  }
  if (t_len > config.max_positions) {
    throw DataError("encode: sequence of " + std::to_string(t_len) +
                    " tokens exceeds max_positions=" +
                    std::to_string(config.max_positions));
  }
  for (std::size_t id : input.token_ids) {
    if (id >= config.vocab_size) {
      throw DataError("encode: token id " + std::to_string(id) +
                      " outside the vocabulary");
    }
  }
  if (input.attention_mask.size() != t_len) {
    throw std::invalid_argument("encode: attention mask length mismatch");
  }

  const double rate = config.dropout_rate;
  const bool use_dropout = training && rate > 0.0;
  if (use_dropout && rng == nullptr) {
    throw std::invalid_argument("encode: training needs an rng");
  }

  std::vector<std::size_t> positions(t_len);
  std::iota(positions.begin(), positions.end(), 0);
  Tensor emb = add(tape, gather_rows(tape, params.token_emb, input.token_ids),
                   gather_rows(tape, params.pos_emb, positions));
  emb = layer_norm(tape, emb, params.emb_gain, params.emb_bias, kLayerNormEps);
  if (use_dropout) {
    emb = dropout(tape, emb, rate, training, *rng);
  }

  EncodeResult result;
  if (want_trace) {
    result.trace.emplace();
    result.trace->seq_len = t_len;
    result.trace->num_heads = config.num_heads;
  }
  Tensor hidden = emb;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    std::vector<std::vector<double>>* trace_heads = nullptr;
    if (want_trace) {
      result.trace->layers.emplace_back();
      trace_heads = &result.trace->layers.back();
    }
    hidden = transformer_layer(tape, hidden, params.layers[l], config,
                               input.attention_mask, training, rng,
                               trace_heads);
  }
  result.hidden = hidden;
  return result;
}

}  // namespace ssc
