#pragma once

// JSONL serialization of generation and attack records. One JSON object per
// line; doubles round-trip exactly.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "tempmark/attack.hpp"
#include "tempmark/greenlist.hpp"
#include "tempmark/watermark.hpp"

namespace tempmark {

// Which scheme produced a record, with its parameters. monostate = plain
// unwatermarked sampling.
using MethodParams = std::variant<std::monostate, WatermarkParams, BaselineParams>;

struct StoredRecord {
  GenerationRecord record;
  MethodParams params;

  bool operator==(const StoredRecord&) const = default;
};

// Line fields: prompt_ids, generated_ids, temperatures, chosen_probs,
// rng_seed, params.
void append_record(std::ostream& out, const StoredRecord& stored);
void write_records(const std::filesystem::path& path, std::span<const StoredRecord> records);
std::vector<StoredRecord> read_records(const std::filesystem::path& path);

struct StoredAttack {
  AttackRecord record;
  double fraction = 0.0;
  std::uint64_t rng_seed = 0;

  bool operator==(const StoredAttack&) const = default;
};

// Line fields: original_ids, attacked_ids, positions, fraction, rng_seed.
void append_attack(std::ostream& out, const StoredAttack& stored);
void write_attacks(const std::filesystem::path& path, std::span<const StoredAttack> attacks);
std::vector<StoredAttack> read_attacks(const std::filesystem::path& path);

}  // namespace tempmark
