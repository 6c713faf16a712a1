#include "tempmark/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tempmark/watermark.hpp"

namespace tempmark {

namespace {

// ceil with a guard against decimal fractions landing a hair above an
// integer after binary rounding (0.3 * 10 and friends).
std::size_t replacement_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

}  // namespace

AttackRecord attack(const TokenSeq& text, const AttackConfig& config) {
  if (!(config.fraction >= 0.0 && config.fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in [0,1]");
  }
  if (text.empty()) throw std::invalid_argument("text must be nonempty");
  if (!config.oracle) throw std::invalid_argument("attack requires a substitution oracle");

  const std::size_t n_replace = replacement_count(config.fraction, text.size());
  SplitMix64 rng(config.rng_seed);

  // Partial Fisher-Yates: the first n_replace slots are a uniform sample
  // of positions without replacement.
  std::vector<std::size_t> indices(text.size());
  std::iota(indices.begin(), indices.end(), 0);
  for (std::size_t i = 0; i < n_replace; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next() % (indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
  std::vector<std::size_t> positions(indices.begin(),
                                     indices.begin() + static_cast<std::ptrdiff_t>(n_replace));
  std::sort(positions.begin(), positions.end());

  AttackRecord record;
  record.original = text;
  record.attacked = text;
  record.positions = std::move(positions);

  // Ascending order: each substitution sees previously substituted left context.
  for (const std::size_t pos : record.positions) {
    const TokenSeq left(record.attacked.begin(),
                        record.attacked.begin() + static_cast<std::ptrdiff_t>(pos));
    const TokenId replacement = config.oracle(left, record.original[pos], rng);
    if (replacement == record.original[pos]) {
      throw std::runtime_error("substitution oracle returned the original token");
    }
    record.attacked[pos] = replacement;
  }
  return record;
}

TokenId lm_substitution_oracle(const LogitsProvider& provider,
                               const TokenSeq& left_context, TokenId original,
                               SplitMix64& rng) {
  const int vocab = provider.vocab_size();
  if (vocab < 2) throw std::invalid_argument("cannot substitute");

  std::vector<double> probs = softmax_with_temperature(provider.logits(left_context), 1.0);

  double kept = 0.0;
  if (original >= 0 && original < vocab) {
    probs[static_cast<std::size_t>(original)] = 0.0;
  }
  for (double p : probs) kept += p;

  if (kept <= 0.0) {
    // Degenerate distribution: fall back to a uniform draw over the others.
    if (original >= 0 && original < vocab) {
      auto picked = static_cast<TokenId>(rng.next() % static_cast<std::uint64_t>(vocab - 1));
      if (picked >= original) picked += 1;
      return picked;
    }
    return static_cast<TokenId>(rng.next() % static_cast<std::uint64_t>(vocab));
  }

  for (double& p : probs) p /= kept;
  const std::size_t picked = multinomial_pick(probs, rng.next_unit());
  return static_cast<TokenId>(picked);
}

SubstitutionOracle make_lm_oracle(const LogitsProvider& provider) {
  return [&provider](const TokenSeq& left, TokenId original, SplitMix64& rng) {
    return lm_substitution_oracle(provider, left, original, rng);
  };
}

}  // namespace tempmark
