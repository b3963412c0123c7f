#include "ssc/heads.hpp"

#include <stdexcept>

#include "ssc/error.hpp"

namespace ssc {

namespace {
constexpr double kInitStd = 0.02;
}

FeedForwardHead FeedForwardHead::init(std::size_t in_dim,
                                      std::size_t hidden_dim,
                                      std::size_t out_dim, Rng& rng) {
  FeedForwardHead head;
  head.layers.emplace_back(Tensor::randn({in_dim, hidden_dim}, kInitStd, rng, true),
                           Tensor::zeros({hidden_dim}, true));
  head.layers.emplace_back(Tensor::randn({hidden_dim, out_dim}, kInitStd, rng, true),
                           Tensor::zeros({out_dim}, true));
  return head;
}

Tensor FeedForwardHead::forward(Tape& tape, const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = add_bias(tape, matmul(tape, h, layers[i].first), layers[i].second);
    if (i + 1 < layers.size()) {
      h = gelu(tape, h);
    }
  }
  return h;
}

void FeedForwardHead::collect(ParamSet& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.add(prefix + ".l" + std::to_string(i) + ".w", layers[i].first);
    out.add(prefix + ".l" + std::to_string(i) + ".b", layers[i].second);
  }
}

Tensor classify_joint(Tape& tape, const Tensor& hidden,
                      const std::vector<std::size_t>& positions,
                      const FeedForwardHead& head) {
  return head.forward(tape, gather_rows(tape, hidden, positions));
}

Tensor score_regression(Tape& tape, const Tensor& hidden,
                        const std::vector<std::size_t>& positions,
                        const FeedForwardHead& head,
                        const std::vector<double>* extra_feature) {
  Tensor rows = gather_rows(tape, hidden, positions);
  if (extra_feature != nullptr) {
    if (extra_feature->size() != positions.size()) {
      throw std::invalid_argument(
          "score_regression: feature length does not match sentences");
    }
    Tensor feature =
        Tensor::from_data({positions.size(), 1}, *extra_feature);
    rows = concat_cols(tape, {rows, feature});
  }
  if (rows.dim(1) != head.in_dim()) {
    throw std::invalid_argument("score_regression: head expects width " +
                                std::to_string(head.in_dim()) + ", got " +
                                std::to_string(rows.dim(1)));
  }
  Tensor scores = sigmoid(tape, head.forward(tape, rows));
  return reshape(tape, scores, {positions.size()});
}

ClsBaselineParams ClsBaselineParams::init(const EncoderConfig& config,
                                          std::size_t max_sentences,
                                          Rng& rng) {
  ClsBaselineParams p;
  p.context_layer = LayerParams::init(config, rng);
  p.sentence_pos_emb =
      Tensor::randn({max_sentences, config.hidden_dim}, kInitStd, rng, true);
  return p;
}

void ClsBaselineParams::collect(ParamSet& out,
                                const std::string& prefix) const {
  context_layer.collect(out, prefix + ".context");
  out.add(prefix + ".sentence_pos_emb", sentence_pos_emb);
}

Tensor cls_sentence_vectors(Tape& tape,
                            const std::vector<PackedInput>& sentence_packs,
                            const EncoderParams& encoder,
                            const ClsBaselineParams* context, bool training,
                            Rng* rng) {
  if (sentence_packs.empty()) {
    throw std::invalid_argument("cls_sentence_vectors: no sentences");
  }
  std::vector<Tensor> cls_rows;
  cls_rows.reserve(sentence_packs.size());
  for (const PackedInput& packed : sentence_packs) {
    Tensor hidden = encode(tape, packed, encoder, training, rng).hidden;
    cls_rows.push_back(gather_rows(tape, hidden, {0}));
  }
  Tensor stack = cls_rows.size() == 1 ? cls_rows[0]
                                      : concat_rows(tape, cls_rows);
  if (context == nullptr) {
    return stack;
  }
  const std::size_t n = sentence_packs.size();
  if (n > context->sentence_pos_emb.dim(0)) {
    throw DataError("cls_sentence_vectors: " + std::to_string(n) +
                    " sentences exceed the context layer's capacity of " +
                    std::to_string(context->sentence_pos_emb.dim(0)));
  }
  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  stack = add(tape, stack,
              gather_rows(tape, context->sentence_pos_emb, positions));
  const std::vector<std::uint8_t> mask(n, 1);
  return transformer_layer(tape, stack, context->context_layer, encoder.config,
                           mask, training, rng, nullptr);
}

Tensor classify_cls_baseline(Tape& tape,
                             const std::vector<PackedInput>& sentence_packs,
                             const EncoderParams& encoder,
                             const ClsBaselineParams* context,
                             const FeedForwardHead& head, bool training,
                             Rng* rng) {
  Tensor vectors = cls_sentence_vectors(tape, sentence_packs, encoder, context,
                                        training, rng);
  return head.forward(tape, vectors);
}

}  // namespace ssc
