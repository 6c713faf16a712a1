#include "tempmark/seeded_random.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace tempmark {

std::uint64_t fnv1a64(const void* data, std::size_t size) noexcept {
  constexpr std::uint64_t kOffsetBasis = 14695981039346656037ULL;
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = kOffsetBasis;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= kPrime;
  }
  return hash;
}

std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64_once(std::uint64_t seed) noexcept {
  return splitmix64_next(seed);
}

double unit_from_bits(std::uint64_t z) noexcept {
  // 53-bit mantissa map; result is strictly below 1.
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double uniform_from_seed(std::uint64_t seed) noexcept {
  return unit_from_bits(splitmix64_once(seed));
}

std::uint64_t context_hash(std::span<const TokenId> window, int expected_len) {
  if (expected_len < 0 || window.size() != static_cast<std::size_t>(expected_len)) {
    throw std::invalid_argument("window length mismatch");
  }
  std::uint64_t hash = fnv1a64(nullptr, 0);
  for (TokenId id : window) {
    const auto u = static_cast<std::uint32_t>(id);
    unsigned char bytes[4] = {
        static_cast<unsigned char>(u & 0xFF),
        static_cast<unsigned char>((u >> 8) & 0xFF),
        static_cast<unsigned char>((u >> 16) & 0xFF),
        static_cast<unsigned char>((u >> 24) & 0xFF),
    };
    for (unsigned char b : bytes) {
      hash ^= b;
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

void WatermarkParams::validate() const {
  if (!(base_temperature > 0.0)) throw std::invalid_argument("T0 must be positive");
  if (!(min_multiplier > 0.0)) throw std::invalid_argument("m must be positive");
  if (!(min_multiplier < max_multiplier)) throw std::invalid_argument("m must be < M");
  if (window_len < 1) throw std::invalid_argument("h must be at least 1");
}

double temperature_from_uniform(const WatermarkParams& params, double u) noexcept {
  return params.base_temperature *
         (params.min_multiplier + (params.max_multiplier - params.min_multiplier) * u);
}

double sample_temperature(const WatermarkParams& params,
                          std::span<const TokenId> window) {
  params.validate();
  const double u = uniform_from_seed(context_hash(window, params.window_len));
  return temperature_from_uniform(params, u);
}

std::size_t GreenMask::green_count() const {
  std::size_t n = 0;
  for (bool b : bits) n += b ? 1 : 0;
  return n;
}

GreenMask green_partition(std::uint64_t seed, int vocab_size, double green_fraction) {
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be at least 2");
  if (!(green_fraction > 0.0 && green_fraction < 1.0)) {
    throw std::invalid_argument("gamma must be in (0,1)");
  }

  std::vector<TokenId> ids(static_cast<std::size_t>(vocab_size));
  std::iota(ids.begin(), ids.end(), 0);

  SplitMix64 rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
    std::swap(ids[i], ids[j]);
  }

  const auto n_green = static_cast<std::size_t>(
      std::floor(green_fraction * static_cast<double>(vocab_size)));

  GreenMask mask;
  mask.green_fraction = green_fraction;
  mask.bits.assign(static_cast<std::size_t>(vocab_size), false);
  for (std::size_t i = 0; i < n_green; ++i) {
    mask.bits[static_cast<std::size_t>(ids[i])] = true;
  }
  return mask;
}

}  // namespace tempmark
