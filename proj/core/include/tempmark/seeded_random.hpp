#pragma once

// Deterministic randomness kernel: context-window hashing, seed-to-uniform
// derivation, per-token temperature draws, and the seeded vocabulary
// partition used by the green-list scheme. Everything here is a pure
// function of its inputs; generator and detector recompute identical
// values from the text alone.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tempmark/types.hpp"

namespace tempmark {

// FNV-1a, 64-bit, over a raw byte stream.
std::uint64_t fnv1a64(const void* data, std::size_t size) noexcept;

// One splitmix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64_next(std::uint64_t& state) noexcept;

// Single mixed output for a given seed, state discarded.
std::uint64_t splitmix64_once(std::uint64_t seed) noexcept;

// Maps a 64-bit value to [0,1) using the top 53 bits.
double unit_from_bits(std::uint64_t z) noexcept;

// U = unit_from_bits(splitmix64_once(seed)). Pure, total, half-open [0,1).
double uniform_from_seed(std::uint64_t seed) noexcept;

// Stateful splitmix64 stream for token sampling and shuffles.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept { return splitmix64_next(state_); }
  double next_unit() noexcept { return unit_from_bits(next()); }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~0ULL; }
  std::uint64_t operator()() noexcept { return next(); }

 private:
  std::uint64_t state_;
};

// Hash of a context window: FNV-1a over each token id encoded as 4 bytes,
// least-significant byte first. Throws std::invalid_argument
// ("window length mismatch") unless window.size() == expected_len.
std::uint64_t context_hash(std::span<const TokenId> window, int expected_len);

// Parameters of the temperature watermark. The per-token temperature is
// drawn as base_temperature * (min_multiplier + (max_multiplier -
// min_multiplier) * U) where U is seeded by the hash of the last
// window_len tokens.
struct WatermarkParams {
  double base_temperature = 1.0;  // T0
  double min_multiplier = 0.3;    // m
  double max_multiplier = 3.0;    // M
  int window_len = 2;             // h

  void validate() const;  // throws std::invalid_argument on bad values

  bool operator==(const WatermarkParams&) const = default;
};

// The temperature for a given uniform draw u in [0,1).
double temperature_from_uniform(const WatermarkParams& params, double u) noexcept;

// T = temperature_from_uniform(params, uniform_from_seed(context_hash(window))).
// Always in [T0*m, T0*M).
double sample_temperature(const WatermarkParams& params,
                          std::span<const TokenId> window);

// Seeded partition of the vocabulary into green (true) and red (false).
struct GreenMask {
  std::vector<bool> bits;  // length |V|
  double green_fraction = 0.5;

  std::size_t green_count() const;
};

// Fisher-Yates shuffle of ids 0..vocab_size-1 driven by a splitmix64 stream
// from `seed`; the first floor(green_fraction * vocab_size) shuffled ids are
// green. Deterministic in (seed, vocab_size, green_fraction).
GreenMask green_partition(std::uint64_t seed, int vocab_size, double green_fraction);

}  // namespace tempmark
