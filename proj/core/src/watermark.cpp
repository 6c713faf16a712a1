#include "tempmark/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace tempmark {

std::vector<double> softmax_with_temperature(const LogitsVector& logits,
                                             double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("nonpositive temperature");
  if (logits.empty()) throw std::invalid_argument("empty logits vector");

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp((logits[i] - max_logit) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

std::size_t multinomial_pick(const std::vector<double>& probs, double u) {
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_nonzero = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return last_nonzero;  // floating-point remainder at the top of the CDF
}

namespace {

TokenSeq padded_prompt(const TokenSeq& prompt, int window_len) {
  if (prompt.size() >= static_cast<std::size_t>(window_len)) return prompt;
  TokenSeq padded(static_cast<std::size_t>(window_len) - prompt.size(), kBosId);
  padded.insert(padded.end(), prompt.begin(), prompt.end());
  return padded;
}

LogitsVector provider_logits_at_step(const LogitsProvider& provider,
                                     const TokenSeq& context, std::size_t step) {
  try {
    return provider.logits(context);
  } catch (const std::exception& e) {
    throw std::runtime_error("logits provider failed at generation step " +
                             std::to_string(step) + ": " + e.what());
  }
}

}  // namespace

GenerationRecord generate(const LogitsProvider& provider, const TokenSeq& prompt,
                          const WatermarkParams& params, int length,
                          std::uint64_t rng_seed) {
  params.validate();
  if (length < 1) throw std::invalid_argument("length must be at least 1");

  GenerationRecord record;
  record.prompt = padded_prompt(prompt, params.window_len);
  record.rng_seed = rng_seed;
  record.generated.reserve(static_cast<std::size_t>(length));
  record.temperatures.reserve(static_cast<std::size_t>(length));
  record.chosen_probs.reserve(static_cast<std::size_t>(length));

  TokenSeq context = record.prompt;
  SplitMix64 sampler(rng_seed);
  const auto h = static_cast<std::size_t>(params.window_len);

  for (int step = 0; step < length; ++step) {
    const std::span<const TokenId> window(context.data() + context.size() - h, h);
    const double temperature = sample_temperature(params, window);

    const LogitsVector logits =
        provider_logits_at_step(provider, context, static_cast<std::size_t>(step));
    const std::vector<double> probs = softmax_with_temperature(logits, temperature);

    const std::size_t picked = multinomial_pick(probs, sampler.next_unit());
    record.generated.push_back(static_cast<TokenId>(picked));
    record.temperatures.push_back(temperature);
    record.chosen_probs.push_back(probs[picked]);
    context.push_back(static_cast<TokenId>(picked));
  }
  return record;
}

GenerationRecord generate_plain(const LogitsProvider& provider, const TokenSeq& prompt,
                                int length, std::uint64_t rng_seed) {
  if (length < 1) throw std::invalid_argument("length must be at least 1");

  GenerationRecord record;
  record.prompt = prompt;
  record.rng_seed = rng_seed;

  TokenSeq context = prompt;
  SplitMix64 sampler(rng_seed);
  for (int step = 0; step < length; ++step) {
    const LogitsVector logits =
        provider_logits_at_step(provider, context, static_cast<std::size_t>(step));
    const std::vector<double> probs = softmax_with_temperature(logits, 1.0);
    const std::size_t picked = multinomial_pick(probs, sampler.next_unit());
    record.generated.push_back(static_cast<TokenId>(picked));
    record.chosen_probs.push_back(probs[picked]);
    context.push_back(static_cast<TokenId>(picked));
  }
  return record;
}

DetectionResult detect(const LogitsProvider& provider, const TokenSeq& text,
                       const WatermarkParams& params, double threshold) {
  params.validate();
  const auto h = static_cast<std::size_t>(params.window_len);
  if (text.size() <= h) throw std::runtime_error("text too short to score");

  const int vocab = provider.vocab_size();
  DetectionResult result;
  result.per_token_probs.reserve(text.size() - h);

  TokenSeq context(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(h));
  for (std::size_t t = h; t < text.size(); ++t) {
    if (text[t] < 0 || text[t] >= vocab) throw std::runtime_error("invalid token id");
    const std::span<const TokenId> window(text.data() + t - h, h);
    const double temperature = sample_temperature(params, window);

    const std::vector<double> probs =
        softmax_with_temperature(provider.logits(context), temperature);
    result.per_token_probs.push_back(probs[static_cast<std::size_t>(text[t])]);
    context.push_back(text[t]);
  }

  result.n_scored = result.per_token_probs.size();
  double sum = 0.0;
  for (double p : result.per_token_probs) sum += p;
  result.score = sum / static_cast<double>(result.n_scored);
  result.watermarked = result.score >= threshold;
  return result;
}

TokenSeq detection_text(const GenerationRecord& record, int window_len) {
  const auto h = static_cast<std::size_t>(window_len);
  TokenSeq text;
  if (record.prompt.size() >= h) {
    text.assign(record.prompt.end() - static_cast<std::ptrdiff_t>(h), record.prompt.end());
  } else {
    text = record.prompt;
  }
  text.insert(text.end(), record.generated.begin(), record.generated.end());
  return text;
}

}  // namespace tempmark
