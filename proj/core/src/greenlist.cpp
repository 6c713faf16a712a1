#include "tempmark/greenlist.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace tempmark {

void BaselineParams::validate() const {
  if (!(green_fraction > 0.0 && green_fraction < 1.0)) {
    throw std::invalid_argument("gamma must be in (0,1)");
  }
  if (green_bias < 0.0) throw std::invalid_argument("delta must be nonnegative");
  if (window_len < 1) throw std::invalid_argument("h must be at least 1");
}

GenerationRecord generate_baseline(const LogitsProvider& provider,
                                   const TokenSeq& prompt, const BaselineParams& params,
                                   int length, std::uint64_t rng_seed) {
  params.validate();
  if (length < 1) throw std::invalid_argument("length must be at least 1");

  const auto h = static_cast<std::size_t>(params.window_len);
  GenerationRecord record;
  if (prompt.size() >= h) {
    record.prompt = prompt;
  } else {
    record.prompt.assign(h - prompt.size(), kBosId);
    record.prompt.insert(record.prompt.end(), prompt.begin(), prompt.end());
  }
  record.rng_seed = rng_seed;

  const int vocab = provider.vocab_size();
  TokenSeq context = record.prompt;
  SplitMix64 sampler(rng_seed);

  for (int step = 0; step < length; ++step) {
    const std::span<const TokenId> window(context.data() + context.size() - h, h);
    const std::uint64_t mask_seed = context_hash(window, params.window_len) ^ params.key_seed;
    const GreenMask mask = green_partition(mask_seed, vocab, params.green_fraction);

    LogitsVector logits;
    try {
      logits = provider.logits(context);
    } catch (const std::exception& e) {
      throw std::runtime_error("logits provider failed at generation step " +
                               std::to_string(step) + ": " + e.what());
    }
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (mask.bits[j]) logits[j] += params.green_bias;
    }

    const std::vector<double> probs = softmax_with_temperature(logits, 1.0);
    const std::size_t picked = multinomial_pick(probs, sampler.next_unit());
    record.generated.push_back(static_cast<TokenId>(picked));
    record.chosen_probs.push_back(probs[picked]);
    context.push_back(static_cast<TokenId>(picked));
  }
  return record;
}

BaselineDetection detect_baseline(const TokenSeq& text, const BaselineParams& params,
                                  int vocab_size) {
  params.validate();
  const auto h = static_cast<std::size_t>(params.window_len);
  if (text.size() <= h) throw std::runtime_error("text too short to score");

  BaselineDetection detection;
  for (std::size_t t = h; t < text.size(); ++t) {
    if (text[t] < 0 || text[t] >= vocab_size) throw std::runtime_error("invalid token id");
    const std::span<const TokenId> window(text.data() + t - h, h);
    const std::uint64_t mask_seed = context_hash(window, params.window_len) ^ params.key_seed;
    const GreenMask mask = green_partition(mask_seed, vocab_size, params.green_fraction);
    if (mask.bits[static_cast<std::size_t>(text[t])]) detection.green_count += 1;
    detection.n_scored += 1;
  }

  const double n = static_cast<double>(detection.n_scored);
  const double gamma = params.green_fraction;
  detection.z = (static_cast<double>(detection.green_count) - gamma * n) /
                std::sqrt(n * gamma * (1.0 - gamma));
  return detection;
}

}  // namespace tempmark
