#include <cmath>
#include <set>

#include "doctest.h"
#include "support/synthetic_corpus.hpp"
#include "support/test_providers.hpp"
#include "tempmark/attack.hpp"
#include "tempmark/ngram_lm.hpp"
#include "tempmark/vocab.hpp"
#include "tempmark/watermark.hpp"

using namespace tempmark;
using namespace tempmark::testing;

namespace {

// Trivial oracle: next id modulo the vocabulary, never the original.
SubstitutionOracle cyclic_oracle(int vocab_size) {
  return [vocab_size](const TokenSeq&, TokenId original, SplitMix64&) {
    return static_cast<TokenId>((original + 1) % vocab_size);
  };
}

}  // namespace

TEST_CASE("fraction zero leaves the text untouched") {
  AttackConfig config;
  config.fraction = 0.0;
  config.oracle = cyclic_oracle(10);
  const TokenSeq text{1, 2, 3, 4, 5};
  const AttackRecord rec = attack(text, config);
  CHECK(rec.attacked == text);
  CHECK(rec.positions.empty());
}

TEST_CASE("fraction one replaces every position") {
  AttackConfig config;
  config.fraction = 1.0;
  config.oracle = cyclic_oracle(10);
  const TokenSeq text{1, 2, 3, 4, 5};
  const AttackRecord rec = attack(text, config);
  CHECK(rec.positions.size() == 5);
  for (std::size_t i = 0; i < text.size(); ++i) CHECK(rec.attacked[i] != text[i]);
}

TEST_CASE("thirty percent of ten tokens is exactly three replacements") {
  AttackConfig config;
  config.fraction = 0.3;
  config.oracle = cyclic_oracle(10);
  const TokenSeq text{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(attack(text, config).positions.size() == 3);
}

TEST_CASE("replacement count follows the ceil rule for decimal fractions") {
  // Oracle: ceil(a*N/b) in integer arithmetic for fraction a/b.
  const std::pair<int, int> fractions[] = {{0, 10}, {1, 10}, {1, 4}, {3, 10},
                                           {1, 2},  {3, 4},  {9, 10}, {10, 10}};
  for (const auto& [a, b] : fractions) {
    AttackConfig config;
    config.fraction = static_cast<double>(a) / static_cast<double>(b);
    config.oracle = cyclic_oracle(50);
    for (std::size_t n = 1; n <= 150; ++n) {
      const TokenSeq text(n, 7);
      const std::size_t expected = (static_cast<std::size_t>(a) * n + b - 1) / b;
      CHECK(attack(text, config).positions.size() == expected);
    }
  }
}

TEST_CASE("attacked text differs exactly at the reported positions") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10000; ++trial) {
    AttackConfig config;
    config.fraction = rng.next_unit();
    config.rng_seed = rng.next();
    config.oracle = cyclic_oracle(20);

    TokenSeq text;
    const std::size_t n = 1 + rng.next() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      text.push_back(static_cast<TokenId>(rng.next() % 20));
    }

    const AttackRecord rec = attack(text, config);
    CHECK(rec.attacked.size() == text.size());
    const std::set<std::size_t> replaced(rec.positions.begin(), rec.positions.end());
    CHECK(replaced.size() == rec.positions.size());  // distinct
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (replaced.count(i)) {
        CHECK(rec.attacked[i] != text[i]);
      } else {
        CHECK(rec.attacked[i] == text[i]);
      }
    }
  }
}

TEST_CASE("attack is deterministic in text and config") {
  AttackConfig config;
  config.fraction = 0.4;
  config.rng_seed = 777;
  config.oracle = cyclic_oracle(30);
  const TokenSeq text{5, 6, 7, 8, 9, 10, 11, 12};
  CHECK((attack(text, config) == attack(text, config)));
}

TEST_CASE("attack validates the fraction and the text") {
  AttackConfig config;
  config.oracle = cyclic_oracle(10);
  config.fraction = 1.5;
  CHECK_THROWS_WITH_AS(attack(TokenSeq{1}, config), "fraction must be in [0,1]",
                       std::invalid_argument);
  config.fraction = -0.1;
  CHECK_THROWS_AS(attack(TokenSeq{1}, config), std::invalid_argument);
  config.fraction = 0.5;
  CHECK_THROWS_AS(attack(TokenSeq{}, config), std::invalid_argument);
}

TEST_CASE("a two token vocabulary admits exactly one substitute") {
  const UniformProvider provider(2);
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(lm_substitution_oracle(provider, TokenSeq{}, 0, rng) == 1);
    CHECK(lm_substitution_oracle(provider, TokenSeq{}, 1, rng) == 0);
  }
}

TEST_CASE("the oracle never returns the original token") {
  const HashedProvider provider(9);
  SplitMix64 rng(8);
  for (int i = 0; i < 100000; ++i) {
    const auto original = static_cast<TokenId>(rng.next() % 9);
    const TokenSeq left{static_cast<TokenId>(rng.next() % 9)};
    CHECK(lm_substitution_oracle(provider, left, original, rng) != original);
  }
}

TEST_CASE("oracle draws are uniform over the candidates for a flat provider") {
  const int vocab = 6;
  const UniformProvider provider(vocab);
  const TokenId original = 2;
  SplitMix64 rng(99);

  const int draws = 10000;
  std::vector<int> counts(vocab, 0);
  for (int i = 0; i < draws; ++i) {
    counts[static_cast<std::size_t>(
        lm_substitution_oracle(provider, TokenSeq{}, original, rng))] += 1;
  }
  CHECK(counts[static_cast<std::size_t>(original)] == 0);

  // Chi-square against uniform over the 5 candidates; df=4, p=0.01 cutoff 13.28.
  const double expected = static_cast<double>(draws) / (vocab - 1);
  double chi2 = 0.0;
  for (int j = 0; j < vocab; ++j) {
    if (j == original) continue;
    const double d = counts[static_cast<std::size_t>(j)] - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 13.28);
}

TEST_CASE("oracle refuses vocabularies below two entries") {
  const UniformProvider provider(1);
  SplitMix64 rng(1);
  CHECK_THROWS_WITH_AS(lm_substitution_oracle(provider, TokenSeq{}, 0, rng),
                       "cannot substitute", std::invalid_argument);
}

TEST_CASE("the attack only ever degrades the watermark score") {
  const CorpusSpec spec{.seed = 5, .n_word_types = 100, .n_tokens = 20000};
  const std::string corpus_text = make_corpus_text(spec);
  const Vocab vocab = build_vocab(corpus_text, 256);
  const NGramModel model = NGramModel::train(encode(corpus_text, vocab), 3, 1.0, vocab.size());

  const WatermarkParams params;
  AttackConfig config;
  config.fraction = 0.3;
  config.oracle = make_lm_oracle(model);

  std::vector<double> clean;
  std::vector<double> attacked;
  SplitMix64 rng(4);
  for (int i = 0; i < 40; ++i) {
    const TokenSeq prompt{static_cast<TokenId>(2 + rng.next() % 60),
                          static_cast<TokenId>(2 + rng.next() % 60)};
    const GenerationRecord rec = generate(model, prompt, params, 100, rng.next());
    clean.push_back(detect(model, detection_text(rec, params.window_len), params, 0.0).score);

    config.rng_seed = rng.next();
    GenerationRecord hit = rec;
    hit.generated = attack(rec.generated, config).attacked;
    attacked.push_back(
        detect(model, detection_text(hit, params.window_len), params, 0.0).score);
  }
  CHECK(mean(attacked) < mean(clean));
}
