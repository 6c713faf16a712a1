#pragma once

// Green/red-list baseline: a seeded partition of the vocabulary per context
// window, a logit bias toward the green half at generation, and a
// one-proportion z-test at detection. Detection needs no language model.

#include <cstdint>

#include "tempmark/logits_provider.hpp"
#include "tempmark/seeded_random.hpp"
#include "tempmark/watermark.hpp"

namespace tempmark {

struct BaselineParams {
  double green_fraction = 0.5;  // gamma
  double green_bias = 2.0;      // delta, added to green-token logits
  int window_len = 2;           // h
  std::uint64_t key_seed = 0;   // mixed into the context hash

  void validate() const;  // throws std::invalid_argument on bad values

  bool operator==(const BaselineParams&) const = default;
};

struct BaselineDetection {
  std::size_t green_count = 0;
  std::size_t n_scored = 0;
  double z = 0.0;  // (green_count - gamma*n) / sqrt(n*gamma*(1-gamma))
};

// Per step: mask = green_partition(context_hash(window) XOR key_seed, |V|,
// gamma); green logits get +delta; sampling at temperature 1 from the same
// splitmix64 stream construction as generate(). temperatures stays empty.
GenerationRecord generate_baseline(const LogitsProvider& provider,
                                   const TokenSeq& prompt, const BaselineParams& params,
                                   int length, std::uint64_t rng_seed);

// Recomputes each scored position's mask from its window and counts green
// hits. Pure function of (text, params, vocab_size); no forward pass.
// Throws std::runtime_error ("text too short to score") when
// text.size() <= window_len.
BaselineDetection detect_baseline(const TokenSeq& text, const BaselineParams& params,
                                  int vocab_size);

}  // namespace tempmark
