#include <cmath>
#include <span>

#include "doctest.h"
#include "support/test_providers.hpp"
#include "tempmark/greenlist.hpp"

using namespace tempmark;
using namespace tempmark::testing;

namespace {

GreenMask mask_for_window(const TokenSeq& window, const BaselineParams& params,
                          int vocab_size) {
  const std::uint64_t seed =
      context_hash({window.data(), window.size()}, params.window_len) ^ params.key_seed;
  return green_partition(seed, vocab_size, params.green_fraction);
}

}  // namespace

TEST_CASE("baseline params validation") {
  BaselineParams params;
  params.green_fraction = 0.0;
  CHECK_THROWS_WITH_AS(params.validate(), "gamma must be in (0,1)", std::invalid_argument);
  params = {};
  params.green_bias = -1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.window_len = 0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("zero bias reproduces plain sampling token for token") {
  const HashedProvider provider(12);
  BaselineParams params;
  params.green_bias = 0.0;
  const TokenSeq prompt{2, 3};
  const GenerationRecord biased = generate_baseline(provider, prompt, params, 60, 4242);
  const GenerationRecord plain = generate_plain(provider, prompt, 60, 4242);
  CHECK(biased.generated == plain.generated);
  CHECK(biased.temperatures.empty());
}

TEST_CASE("a huge bias forces every sampled token green") {
  const UniformProvider provider(10);
  BaselineParams params;
  params.green_bias = 50.0;
  const TokenSeq prompt{2, 3};
  const GenerationRecord rec = generate_baseline(provider, prompt, params, 100, 5);

  TokenSeq context = rec.prompt;
  for (TokenId tok : rec.generated) {
    const TokenSeq window(context.end() - params.window_len, context.end());
    const GreenMask mask = mask_for_window(window, params, provider.vocab_size());
    CHECK(mask.bits[static_cast<std::size_t>(tok)]);
    context.push_back(tok);
  }

  // Detection over the same text counts every scored token green.
  const BaselineDetection det =
      detect_baseline(detection_text(rec, params.window_len), params, provider.vocab_size());
  CHECK(det.green_count == det.n_scored);
}

TEST_CASE("generate_baseline is deterministic") {
  const HashedProvider provider(12);
  const BaselineParams params;
  const GenerationRecord a = generate_baseline(provider, TokenSeq{2, 3}, params, 40, 9);
  const GenerationRecord b = generate_baseline(provider, TokenSeq{2, 3}, params, 40, 9);
  CHECK((a == b));
}

TEST_CASE("z statistic arithmetic at the extremes") {
  const UniformProvider provider(10);
  BaselineParams params;
  params.green_bias = 50.0;
  // 100 scored tokens, all green, gamma 0.5: z = (100-50)/sqrt(25) = 10.
  const GenerationRecord rec = generate_baseline(provider, TokenSeq{2, 3}, params, 100, 11);
  const BaselineDetection det =
      detect_baseline(detection_text(rec, params.window_len), params, provider.vocab_size());
  REQUIRE(det.n_scored == 100);
  REQUIRE(det.green_count == 100);
  CHECK(det.z == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("z is zero when the green count sits exactly at gamma*n") {
  BaselineParams params;
  params.window_len = 1;
  const int vocab = 10;

  // Build a text whose scored tokens alternate green and red by construction.
  TokenSeq text{2};
  for (int i = 0; i < 100; ++i) {
    const TokenSeq window{text.back()};
    const GreenMask mask = mask_for_window(window, params, vocab);
    TokenId pick = -1;
    for (int j = 0; j < vocab; ++j) {
      const bool want_green = (i % 2) == 0;
      if (mask.bits[static_cast<std::size_t>(j)] == want_green) {
        pick = j;
        break;
      }
    }
    REQUIRE(pick >= 0);
    text.push_back(pick);
  }

  const BaselineDetection det = detect_baseline(text, params, vocab);
  CHECK(det.n_scored == 100);
  CHECK(det.green_count == 50);
  CHECK(det.z == 0.0);
}

TEST_CASE("unwatermarked random text stays within the null band") {
  const BaselineParams params;
  const int vocab = 50;
  SplitMix64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    TokenSeq text;
    for (int i = 0; i < 402; ++i) {
      text.push_back(static_cast<TokenId>(rng.next() % vocab));
    }
    const BaselineDetection det = detect_baseline(text, params, vocab);
    CHECK(det.n_scored == 400);
    CHECK(std::abs(det.z) < 4.0);
  }
}

TEST_CASE("detection needs no provider and rejects short texts") {
  const BaselineParams params;
  CHECK_THROWS_WITH_AS(detect_baseline(TokenSeq{1, 2}, params, 10),
                       "text too short to score", std::runtime_error);
}

TEST_CASE("z grows stochastically with the bias") {
  const HashedProvider provider(24);
  double previous_mean = -100.0;
  for (const double delta : {0.0, 1.0, 2.0, 4.0}) {
    BaselineParams params;
    params.green_bias = delta;
    std::vector<double> zs;
    SplitMix64 rng(314);
    for (int i = 0; i < 50; ++i) {
      const GenerationRecord rec =
          generate_baseline(provider, TokenSeq{2, 3}, params, 120, rng.next());
      zs.push_back(
          detect_baseline(detection_text(rec, params.window_len), params, provider.vocab_size())
              .z);
    }
    const double m = mean(zs);
    CHECK(m > previous_mean);
    previous_mean = m;
  }
}
