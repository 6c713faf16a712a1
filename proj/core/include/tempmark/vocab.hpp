#pragma once

// Closed-vocabulary tokenizer: lowercased, whitespace-delimited words with
// punctuation split into single-character tokens. Ids 0 and 1 are the
// reserved <bos> and <unk> entries; everything else is assigned by corpus
// frequency (ties broken by first occurrence).

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tempmark/types.hpp"

namespace tempmark {

class Vocab {
 public:
  // `surfaces` must start with the two reserved entries and contain no
  // duplicates. Use build_vocab / load_vocab instead of calling directly.
  explicit Vocab(std::vector<std::string> surfaces);

  int size() const { return static_cast<int>(surfaces_.size()); }
  TokenId bos_id() const { return kBosId; }
  TokenId unk_id() const { return kUnkId; }

  // Returns unk_id for tokens not in the vocabulary.
  TokenId id_of(std::string_view surface) const;

  // Throws std::runtime_error ("invalid token id") for out-of-range ids.
  const std::string& surface(TokenId id) const;

  const std::vector<std::string>& surfaces() const { return surfaces_; }

  bool operator==(const Vocab& other) const { return surfaces_ == other.surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> index_;
};

// Normalizes text into surface tokens: lowercase, split on whitespace,
// punctuation characters become single-character tokens. The reserved
// surfaces "<bos>" and "<unk>" are kept atomic so decode/encode round-trips.
std::vector<std::string> tokenize(std::string_view text);

// The max_size-2 most frequent surface tokens plus the reserved entries.
// Throws std::runtime_error ("empty corpus") if tokenization yields nothing.
Vocab build_vocab(std::string_view corpus_text, std::size_t max_size);

// Out-of-vocabulary tokens map to unk_id; empty text maps to an empty sequence.
TokenSeq encode(std::string_view text, const Vocab& vocab);

// Surface strings joined by single spaces.
std::string decode(const TokenSeq& seq, const Vocab& vocab);

// Vocabulary file: newline-delimited UTF-8 surfaces in id order, starting
// with the two reserved header lines "<bos>" and "<unk>".
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

}  // namespace tempmark
