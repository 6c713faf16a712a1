#pragma once

// Small deterministic providers and statistics helpers shared by the tests.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tempmark/logits_provider.hpp"

namespace tempmark::testing {

// Same logits for every context.
class FixedProvider final : public LogitsProvider {
 public:
  explicit FixedProvider(LogitsVector logits) : logits_(std::move(logits)) {}

  int vocab_size() const override { return static_cast<int>(logits_.size()); }
  LogitsVector logits(const TokenSeq&) const override { return logits_; }

 private:
  LogitsVector logits_;
};

// Uniform distribution over the vocabulary.
class UniformProvider final : public LogitsProvider {
 public:
  explicit UniformProvider(int vocab_size) : vocab_size_(vocab_size) {}

  int vocab_size() const override { return vocab_size_; }
  LogitsVector logits(const TokenSeq&) const override {
    return LogitsVector(static_cast<std::size_t>(vocab_size_), 0.0);
  }

 private:
  int vocab_size_;
};

// Context-dependent but cheap: logit j = ((sum of ids + j) % 7) * 0.5 - 1.5.
class HashedProvider final : public LogitsProvider {
 public:
  explicit HashedProvider(int vocab_size) : vocab_size_(vocab_size) {}

  int vocab_size() const override { return vocab_size_; }
  LogitsVector logits(const TokenSeq& context) const override {
    std::int64_t sum = 0;
    for (TokenId id : context) sum += id;
    LogitsVector out(static_cast<std::size_t>(vocab_size_));
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = static_cast<double>((sum + static_cast<std::int64_t>(j)) % 7) * 0.5 - 1.5;
    }
    return out;
  }

 private:
  int vocab_size_;
};

// Always throws, for error-propagation tests.
class FailingProvider final : public LogitsProvider {
 public:
  explicit FailingProvider(int vocab_size) : vocab_size_(vocab_size) {}

  int vocab_size() const override { return vocab_size_; }
  LogitsVector logits(const TokenSeq&) const override {
    throw std::runtime_error("backend unavailable");
  }

 private:
  int vocab_size_;
};

inline double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

// Welch's t statistic for mean(a) > mean(b).
inline double welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  return (mean(a) - mean(b)) / std::sqrt(va + vb);
}

}  // namespace tempmark::testing
