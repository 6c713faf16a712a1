#pragma once

// Token-substitution paraphrase attack: replaces a fraction of positions,
// one at a time in ascending order, with substitutes drawn from a
// substitution oracle conditioned on the (already-attacked) left context.

#include <cstdint>
#include <functional>
#include <vector>

#include "tempmark/logits_provider.hpp"
#include "tempmark/seeded_random.hpp"
#include "tempmark/types.hpp"

namespace tempmark {

// Returns a replacement token, never equal to `original`. The shared rng
// stream makes the whole attack deterministic in its seed.
using SubstitutionOracle =
    std::function<TokenId(const TokenSeq& left_context, TokenId original, SplitMix64& rng)>;

struct AttackConfig {
  double fraction = 0.3;      // share of positions to replace
  std::uint64_t rng_seed = 0;
  SubstitutionOracle oracle;
};

struct AttackRecord {
  TokenSeq original;
  TokenSeq attacked;
  std::vector<std::size_t> positions;  // sorted replaced indices

  bool operator==(const AttackRecord&) const = default;
};

// Replaces ceil(fraction * |text|) positions chosen uniformly without
// replacement. Throws std::invalid_argument for fraction outside [0,1] or
// empty text.
AttackRecord attack(const TokenSeq& text, const AttackConfig& config);

// Samples from softmax(provider.logits(left_context), T=1) with the original
// token's mass removed and the rest renormalized. Throws
// std::invalid_argument ("cannot substitute") when the vocabulary has fewer
// than two entries.
TokenId lm_substitution_oracle(const LogitsProvider& provider,
                               const TokenSeq& left_context, TokenId original,
                               SplitMix64& rng);

// Binds lm_substitution_oracle to a provider. The provider must outlive the
// returned oracle.
SubstitutionOracle make_lm_oracle(const LogitsProvider& provider);

}  // namespace tempmark
