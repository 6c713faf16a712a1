#pragma once

// Temperature watermarking: generation modulates the sampling temperature
// per token from a hash of the preceding window, detection recomputes the
// same temperatures from the text alone and averages the probabilities of
// the observed tokens.

#include <cstdint>
#include <vector>

#include "tempmark/logits_provider.hpp"
#include "tempmark/seeded_random.hpp"
#include "tempmark/types.hpp"

namespace tempmark {

struct GenerationRecord {
  TokenSeq prompt;     // BOS-padded to at least the hash window length
  TokenSeq generated;  // one entry per step
  std::vector<double> temperatures;  // per generated token; empty for records
                                     // produced without temperature modulation
  std::vector<double> chosen_probs;  // probability of each sampled token
  std::uint64_t rng_seed = 0;        // token-sampling stream seed

  bool operator==(const GenerationRecord&) const = default;
};

struct DetectionResult {
  double score = 0.0;       // mean of per_token_probs
  std::size_t n_scored = 0;
  std::vector<double> per_token_probs;
  bool watermarked = false;  // score >= threshold
};

// Temperature-scaled softmax with max-subtraction. Output sums to 1 within
// 1e-9 and never reorders logits. Throws std::invalid_argument
// ("nonpositive temperature") when temperature <= 0.
std::vector<double> softmax_with_temperature(const LogitsVector& logits,
                                             double temperature);

// Inverse-CDF draw from a probability vector using one uniform in [0,1).
std::size_t multinomial_pick(const std::vector<double>& probs, double u);

// Watermarked generation: per step the hash of the last window_len tokens
// seeds the temperature draw; the token itself is sampled from the rescaled
// distribution with an independent splitmix64 stream seeded by rng_seed.
// Deterministic in all inputs. Prompts shorter than the window are
// BOS-padded on the left.
GenerationRecord generate(const LogitsProvider& provider, const TokenSeq& prompt,
                          const WatermarkParams& params, int length,
                          std::uint64_t rng_seed);

// Plain sampling at temperature 1, no watermark. Same sampling stream
// construction as generate(), so records are comparable.
GenerationRecord generate_plain(const LogitsProvider& provider, const TokenSeq& prompt,
                                int length, std::uint64_t rng_seed);

// Prompt-free detection: positions window_len..end are scored, each against
// the temperature recomputed from its own window, so every hash window lies
// inside the supplied text. The first window_len tokens contribute context
// only. Throws std::runtime_error ("text too short to score") when
// text.size() <= window_len.
DetectionResult detect(const LogitsProvider& provider, const TokenSeq& text,
                       const WatermarkParams& params, double threshold);

// The token sequence a detector should see for a record: the last
// window_len prompt tokens followed by the generated tokens.
TokenSeq detection_text(const GenerationRecord& record, int window_len);

}  // namespace tempmark
