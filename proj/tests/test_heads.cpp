#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ssc/error.hpp"
#include "ssc/heads.hpp"
#include "ssc/seqpack.hpp"
#include "support/helpers.hpp"

using namespace ssc;
using ssct::random_tensor;

namespace {

EncoderConfig tiny_config(std::size_t vocab) {
  EncoderConfig config;
  config.num_layers = 1;
  config.num_heads = 2;
  config.hidden_dim = 16;
  config.ff_dim = 32;
  config.vocab_size = vocab;
  config.max_positions = 32;
  config.dropout_rate = 0.0;
  return config;
}

PackedInput sentence_pack(std::vector<std::size_t> body) {
  PackedInput packed;
  packed.token_ids = {Vocab::kCls};
  packed.token_ids.insert(packed.token_ids.end(), body.begin(), body.end());
  packed.token_ids.push_back(Vocab::kSep);
  packed.sep_positions = {packed.token_ids.size() - 1};
  packed.attention_mask.assign(packed.token_ids.size(), 1);
  packed.range = {0, 1};
  return packed;
}

}  // namespace

TEST_CASE("classify_joint gathers delimiter rows") {
  Rng rng(1);
  FeedForwardHead head = FeedForwardHead::init(4, 8, 3, rng);
  Tensor hidden = random_tensor({6, 4}, rng, 1.0, false);
  Tape tape(false);
  Tensor logits = classify_joint(tape, hidden, {1, 3, 5}, head);
  CHECK(logits.shape() == Shape{3, 3});

  // permuting the gathered positions permutes the logit rows
  Tensor swapped = classify_joint(tape, hidden, {3, 1, 5}, head);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(swapped.at(0, j) == logits.at(1, j));
    CHECK(swapped.at(1, j) == logits.at(0, j));
    CHECK(swapped.at(2, j) == logits.at(2, j));
  }

  CHECK_THROWS_AS(classify_joint(tape, hidden, {9}, head), std::out_of_range);

  // zero weights give identical (zero) logits, i.e. a uniform softmax
  for (auto& [w, b] : head.layers) {
    std::fill(w.data().begin(), w.data().end(), 0.0);
    std::fill(b.data().begin(), b.data().end(), 0.0);
  }
  Tensor zeros = classify_joint(tape, hidden, {0, 2}, head);
  for (double v : zeros.data()) CHECK(v == 0.0);
}

TEST_CASE("score_regression squashes and accepts an extra feature") {
  Rng rng(2);
  Tensor hidden = random_tensor({4, 8}, rng, 1.0, false);
  Tape tape(false);

  // zero weights with output bias b give sigmoid(b) everywhere
  FeedForwardHead head = FeedForwardHead::init(8, 8, 1, rng);
  for (auto& [w, b] : head.layers) {
    std::fill(w.data().begin(), w.data().end(), 0.0);
  }
  head.layers.back().second.data()[0] = 0.4;
  Tensor scores = score_regression(tape, hidden, {0, 1, 2, 3}, head, nullptr);
  CHECK(scores.shape() == Shape{4});
  const double expect = 1.0 / (1.0 + std::exp(-0.4));
  for (double v : scores.data()) {
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // the feature widens the first layer by exactly one input
  FeedForwardHead with_feature = FeedForwardHead::init(9, 8, 1, rng);
  CHECK(with_feature.in_dim() == head.in_dim() + 1);
  const std::vector<double> feature = {0.1, 0.2, 0.3, 0.4};
  Tensor fed =
      score_regression(tape, hidden, {0, 1, 2, 3}, with_feature, &feature);
  CHECK(fed.shape() == Shape{4});

  const std::vector<double> short_feature = {0.1};
  CHECK_THROWS_AS(
      score_regression(tape, hidden, {0, 1, 2, 3}, with_feature,
                       &short_feature),
      std::invalid_argument);
  // feeding a feature into a head without the extra slot is a width error
  CHECK_THROWS_AS(score_regression(tape, hidden, {0, 1, 2, 3}, head, &feature),
                  std::invalid_argument);
}

TEST_CASE("cls baseline shapes and pre-context independence") {
  Rng rng(3);
  const EncoderConfig config = tiny_config(10);
  EncoderParams encoder = EncoderParams::init(config, rng);
  FeedForwardHead head = FeedForwardHead::init(16, 16, 2, rng);

  const std::vector<PackedInput> one = {sentence_pack({4, 5})};
  Tape tape(false);
  Tensor single =
      classify_cls_baseline(tape, one, encoder, nullptr, head, false, nullptr);
  CHECK(single.shape() == Shape{1, 2});

  // identical sentences produce identical vectors before contextualization
  const std::vector<PackedInput> twins = {sentence_pack({4, 5}),
                                          sentence_pack({4, 5}),
                                          sentence_pack({6, 7})};
  Tensor stack =
      cls_sentence_vectors(tape, twins, encoder, nullptr, false, nullptr);
  CHECK(stack.shape() == Shape{3, 16});
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(stack.at(0, j) == stack.at(1, j));
  }

  Tensor logits = classify_cls_baseline(tape, twins, encoder, nullptr, head,
                                        false, nullptr);
  CHECK(logits.shape() == Shape{3, 2});
}

TEST_CASE("joint encoding is context-sensitive, the plain baseline is not") {
  Rng rng(4);
  const EncoderConfig config = tiny_config(10);
  EncoderParams encoder = EncoderParams::init(config, rng);
  FeedForwardHead head = FeedForwardHead::init(16, 16, 2, rng);

  // joint packing: two sentences, the second sentence's tokens change
  PackedInput packed_a;
  packed_a.token_ids = {2, 4, 3, 5, 3};
  packed_a.sep_positions = {2, 4};
  packed_a.attention_mask.assign(5, 1);
  packed_a.range = {0, 2};
  PackedInput packed_b = packed_a;
  packed_b.token_ids[3] = 6;  // sentence 2 differs

  Tape tape(false);
  Tensor joint_a = classify_joint(
      tape, encode(tape, packed_a, encoder, false, nullptr).hidden,
      packed_a.sep_positions, head);
  Tensor joint_b = classify_joint(
      tape, encode(tape, packed_b, encoder, false, nullptr).hidden,
      packed_b.sep_positions, head);
  // sentence 1's logits move even though only sentence 2 changed
  double diff = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    diff = std::max(diff, std::abs(joint_a.at(0, j) - joint_b.at(0, j)));
  }
  CHECK(diff > 1e-9);

  // per-sentence encoding without context: sentence 1 is untouched
  const std::vector<PackedInput> packs_a = {sentence_pack({4}),
                                            sentence_pack({5})};
  const std::vector<PackedInput> packs_b = {sentence_pack({4}),
                                            sentence_pack({6})};
  Tensor base_a = classify_cls_baseline(tape, packs_a, encoder, nullptr, head,
                                        false, nullptr);
  Tensor base_b = classify_cls_baseline(tape, packs_b, encoder, nullptr, head,
                                        false, nullptr);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(base_a.at(0, j) == base_b.at(0, j));
  }
}

TEST_CASE("gradients reach the token embeddings of every sentence") {
  Rng rng(5);
  const EncoderConfig config = tiny_config(10);
  EncoderParams encoder = EncoderParams::init(config, rng);
  FeedForwardHead head = FeedForwardHead::init(16, 16, 2, rng);

  PackedInput packed;
  packed.token_ids = {2, 4, 3, 5, 3, 6, 3};  // three sentences
  packed.sep_positions = {2, 4, 6};
  packed.attention_mask.assign(7, 1);
  packed.range = {0, 3};

  Tape tape;
  Tensor logits = classify_joint(
      tape, encode(tape, packed, encoder, true, nullptr).hidden,
      packed.sep_positions, head);
  Tensor loss = cross_entropy(tape, logits, {0, 1, 0});
  tape.backward(loss);

  const auto& grad = encoder.token_emb.grad();
  for (std::size_t token : {4u, 5u, 6u}) {
    double norm = 0.0;
    for (std::size_t j = 0; j < 16; ++j) {
      norm += std::abs(grad[token * 16 + j]);
    }
    CHECK(norm > 1e-12);
  }
}

TEST_CASE("context layer respects its sentence capacity") {
  Rng rng(6);
  const EncoderConfig config = tiny_config(10);
  EncoderParams encoder = EncoderParams::init(config, rng);
  ClsBaselineParams context = ClsBaselineParams::init(config, 2, rng);
  FeedForwardHead head = FeedForwardHead::init(16, 16, 2, rng);

  const std::vector<PackedInput> three = {sentence_pack({4}),
                                          sentence_pack({5}),
                                          sentence_pack({6})};
  Tape tape(false);
  CHECK_THROWS_AS(classify_cls_baseline(tape, three, encoder, &context, head,
                                        false, nullptr),
                  DataError);
  const std::vector<PackedInput> two = {sentence_pack({4}),
                                        sentence_pack({5})};
  Tensor ok = classify_cls_baseline(tape, two, encoder, &context, head, false,
                                    nullptr);
  CHECK(ok.shape() == Shape{2, 2});
}
