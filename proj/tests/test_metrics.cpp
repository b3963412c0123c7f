#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ssc/metrics.hpp"
#include "ssc/rng.hpp"
#include "support/helpers.hpp"

using namespace ssc;

namespace {

/// Exhaustive-subsequence LCS oracle: enumerates every subsequence of the
/// shorter side and keeps the longest that is a subsequence of the other.
std::size_t lcs_oracle(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  const std::vector<std::string>& small = a.size() <= b.size() ? a : b;
  const std::vector<std::string>& large = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::size_t bits = 0; bits < (std::size_t(1) << small.size()); ++bits) {
    std::vector<std::string> candidate;
    for (std::size_t i = 0; i < small.size(); ++i) {
      if (bits & (std::size_t(1) << i)) candidate.push_back(small[i]);
    }
    if (candidate.size() <= best) continue;
    std::size_t at = 0;
    for (const std::string& tok : large) {
      if (at < candidate.size() && tok == candidate[at]) ++at;
    }
    if (at == candidate.size()) best = candidate.size();
  }
  return best;
}

std::vector<std::string> decode_base3(std::size_t code, std::size_t length) {
  static const std::vector<std::string> alphabet = {"a", "b", "c"};
  std::vector<std::string> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = alphabet[code % 3];
    code /= 3;
  }
  return out;
}

}  // namespace

TEST_CASE("micro_f1 basics") {
  CHECK(micro_f1({{0, 0}, {1, 1}}) == 1.0);
  CHECK(micro_f1({{0, 1}, {1, 0}}) == 0.0);
  CHECK(micro_f1({{0, 0}, {1, 1}, {2, 2}, {2, 0}}) == 0.75);
  CHECK_THROWS_AS(micro_f1({}), std::invalid_argument);
}

TEST_CASE("micro_f1 equals accuracy for single-label prediction lists") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.next_below(60);
    const std::size_t labels = 2 + rng.next_below(5);
    std::vector<LabeledPair> pairs;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      LabeledPair p{rng.next_below(labels), rng.next_below(labels)};
      correct += p.gold == p.pred;
      pairs.push_back(p);
    }
    const double accuracy =
        static_cast<double>(correct) / static_cast<double>(n);
    CHECK(micro_f1(pairs) == accuracy);  // exact, not approximate
  }
}

TEST_CASE("lcs_length examples") {
  const std::vector<std::string> abcd = {"a", "b", "c", "d"};
  CHECK(lcs_length(abcd, abcd) == 4);
  CHECK(lcs_length({"a", "b"}, {"x", "y"}) == 0);
  CHECK(lcs_length(abcd, {"a", "c", "d", "b"}) == 3);
  CHECK(lcs_length({}, abcd) == 0);
}

TEST_CASE("lcs_length matches the exhaustive oracle on short strings") {
  // full sweep over pairs of strings with length <= 4 over {a, b, c}
  std::vector<std::vector<std::string>> universe;
  for (std::size_t len = 0; len <= 4; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      universe.push_back(decode_base3(code, len));
    }
  }
  for (const auto& a : universe) {
    for (const auto& b : universe) {
      CHECK(lcs_length(a, b) == lcs_oracle(a, b));
    }
  }
}

TEST_CASE("rouge_l worked example and contracts") {
  const RougeScore s = rouge_l({"a", "c"}, {"a", "b", "c"});
  CHECK(s.precision == 1.0);
  CHECK(s.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.f == 0.8);  // exact

  const RougeScore perfect = rouge_l({"x", "y"}, {"x", "y"});
  CHECK(perfect.f == 1.0);

  const RougeScore empty = rouge_l({}, {"x"});
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f == 0.0);

  CHECK_THROWS_AS(rouge_l({"x"}, {}), std::invalid_argument);
}

TEST_CASE("rouge_l F is symmetric for equal lengths") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 1 + rng.next_below(6);
    auto make = [&rng, n]() {
      std::vector<std::string> s;
      for (std::size_t i = 0; i < n; ++i) {
        s.push_back(std::string(1, char('a' + rng.next_below(3))));
      }
      return s;
    };
    const auto a = make(), b = make();
    CHECK(rouge_l(a, b).f == rouge_l(b, a).f);
  }
}

TEST_CASE("rouge_n examples") {
  CHECK(rouge_n({"a", "b"}, {"a", "b"}, 2).recall == 1.0);
  CHECK(rouge_n({"a", "b"}, {"c", "d"}, 2).recall == 0.0);
  // candidate bigrams {ab, ba}; the single reference bigram ab is covered
  const RougeScore s = rouge_n({"a", "b", "a"}, {"a", "b"}, 2);
  CHECK(s.recall == 1.0);
  CHECK(s.precision == 0.5);
  CHECK_THROWS_AS(rouge_n({"a"}, {"a"}, 0), std::invalid_argument);
}

TEST_CASE("sentence_targets and abstract_rouge") {
  const std::vector<std::string> highlights = {"the key finding"};
  const auto targets = sentence_targets(
      {"the key finding", "unrelated words entirely"}, highlights);
  REQUIRE(targets.size() == 2);
  CHECK(targets[0] == 1.0);
  CHECK(targets[1] == 0.0);
  CHECK_THROWS_AS(sentence_targets({"x"}, {}), std::invalid_argument);

  CHECK(abstract_rouge("same text", {"same text"}) == 1.0);
  CHECK(abstract_rouge("nothing shared", {"foreign words"}) == 0.0);
  const double partial = abstract_rouge("a c", {"a b c"});
  CHECK(partial == 0.8);  // matches the rouge_l oracle value

  // scores stay within [0, 1]
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::string> cand, ref;
    for (std::size_t i = 0; i < 1 + rng.next_below(6); ++i) {
      cand.push_back(std::string(1, char('a' + rng.next_below(4))));
    }
    for (std::size_t i = 0; i < 1 + rng.next_below(6); ++i) {
      ref.push_back(std::string(1, char('a' + rng.next_below(4))));
    }
    const RougeScore s = rouge_l(cand, ref);
    CHECK(s.precision >= 0.0);
    CHECK(s.precision <= 1.0);
    CHECK(s.recall >= 0.0);
    CHECK(s.recall <= 1.0);
    CHECK(s.f >= 0.0);
    CHECK(s.f <= 1.0);
  }
}
