#pragma once

// Trainable add-k-smoothed n-gram model: the self-contained logits provider
// behind the watermarking pipeline. Contexts shorter than order-1 are
// left-padded with <bos>, so logits() is total on all context lengths.

#include <cstdint>
#include <filesystem>
#include <map>

#include "tempmark/logits_provider.hpp"
#include "tempmark/types.hpp"

namespace tempmark {

class NGramModel final : public LogitsProvider {
 public:
  // Counts every length-order window of the BOS-padded corpus.
  // Throws std::invalid_argument for bad order/k and std::runtime_error
  // ("corpus too short") when corpus.size() < order.
  static NGramModel train(const TokenSeq& corpus, int order, double k, int vocab_size);

  int order() const { return order_; }
  double smoothing_k() const { return k_; }
  int vocab_size() const override { return vocab_size_; }

  // Entry j = ln((count(j|ctx) + k) / (total(ctx) + k*|V|)) where ctx is the
  // last order-1 tokens of `context`, BOS-padded on the left.
  LogitsVector logits(const TokenSeq& context) const override;

  std::uint64_t count(const TokenSeq& context, TokenId successor) const;
  std::uint64_t context_total(const TokenSeq& context) const;
  std::size_t context_count() const { return counts_.size(); }

  // Self-describing text format with a "NGLM1" magic header; byte-stable
  // across runs. Load failures throw std::runtime_error
  // ("corrupt model file at byte N: ...").
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  bool operator==(const NGramModel& other) const {
    return order_ == other.order_ && k_ == other.k_ &&
           vocab_size_ == other.vocab_size_ && counts_ == other.counts_;
  }

 private:
  NGramModel(int order, double k, int vocab_size)
      : order_(order), k_(k), vocab_size_(vocab_size) {}

  // The (order-1)-token map key for an arbitrary-length context.
  TokenSeq context_key(const TokenSeq& context) const;

  int order_ = 1;
  double k_ = 1.0;
  int vocab_size_ = 0;
  std::map<TokenSeq, std::map<TokenId, std::uint64_t>> counts_;
};

}  // namespace tempmark
