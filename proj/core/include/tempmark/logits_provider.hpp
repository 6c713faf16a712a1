#pragma once

#include <vector>

#include "tempmark/types.hpp"

namespace tempmark {

// Unnormalized next-token log-scores, natural-log scale, one per vocab entry.
using LogitsVector = std::vector<double>;

// Anything that maps a token context to next-token logits. Implementations
// must be pure functions of the context and safe to share across readers.
class LogitsProvider {
 public:
  virtual ~LogitsProvider() = default;

  virtual int vocab_size() const = 0;

  // Returns exactly vocab_size() finite entries.
  virtual LogitsVector logits(const TokenSeq& context) const = 0;
};

}  // namespace tempmark
