#include "tempmark/records_io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace tempmark {

namespace {

using nlohmann::json;

json params_to_json(const MethodParams& params) {
  json j;
  if (std::holds_alternative<WatermarkParams>(params)) {
    const auto& p = std::get<WatermarkParams>(params);
    j["method"] = "temperature";
    j["t0"] = p.base_temperature;
    j["m"] = p.min_multiplier;
    j["M"] = p.max_multiplier;
    j["h"] = p.window_len;
  } else if (std::holds_alternative<BaselineParams>(params)) {
    const auto& p = std::get<BaselineParams>(params);
    j["method"] = "greenlist";
    j["gamma"] = p.green_fraction;
    j["delta"] = p.green_bias;
    j["h"] = p.window_len;
    j["key_seed"] = p.key_seed;
  } else {
    j["method"] = "plain";
  }
  return j;
}

MethodParams params_from_json(const json& j) {
  const std::string method = j.at("method").get<std::string>();
  if (method == "temperature") {
    WatermarkParams p;
    p.base_temperature = j.at("t0").get<double>();
    p.min_multiplier = j.at("m").get<double>();
    p.max_multiplier = j.at("M").get<double>();
    p.window_len = j.at("h").get<int>();
    return p;
  }
  if (method == "greenlist") {
    BaselineParams p;
    p.green_fraction = j.at("gamma").get<double>();
    p.green_bias = j.at("delta").get<double>();
    p.window_len = j.at("h").get<int>();
    p.key_seed = j.at("key_seed").get<std::uint64_t>();
    return p;
  }
  if (method == "plain") return std::monostate{};
  throw std::runtime_error("unknown record method: " + method);
}

template <typename T>
std::vector<T> parse_lines(const std::filesystem::path& path,
                           T (*parse_one)(const json&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open records file: " + path.string());

  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": parse failure");
    }
    try {
      out.push_back(parse_one(j));
    } catch (const json::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": parse failure (" +
                               e.what() + ")");
    }
  }
  return out;
}

StoredRecord record_from_json(const json& j) {
  StoredRecord stored;
  stored.record.prompt = j.at("prompt_ids").get<TokenSeq>();
  stored.record.generated = j.at("generated_ids").get<TokenSeq>();
  stored.record.temperatures = j.at("temperatures").get<std::vector<double>>();
  stored.record.chosen_probs = j.at("chosen_probs").get<std::vector<double>>();
  stored.record.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  stored.params = params_from_json(j.at("params"));
  return stored;
}

StoredAttack attack_from_json(const json& j) {
  StoredAttack stored;
  stored.record.original = j.at("original_ids").get<TokenSeq>();
  stored.record.attacked = j.at("attacked_ids").get<TokenSeq>();
  stored.record.positions = j.at("positions").get<std::vector<std::size_t>>();
  stored.fraction = j.at("fraction").get<double>();
  stored.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return stored;
}

}  // namespace

void append_record(std::ostream& out, const StoredRecord& stored) {
  json j;
  j["prompt_ids"] = stored.record.prompt;
  j["generated_ids"] = stored.record.generated;
  j["temperatures"] = stored.record.temperatures;
  j["chosen_probs"] = stored.record.chosen_probs;
  j["rng_seed"] = stored.record.rng_seed;
  j["params"] = params_to_json(stored.params);
  out << j.dump() << '\n';
}

void write_records(const std::filesystem::path& path, std::span<const StoredRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open records file for writing: " + path.string());
  for (const StoredRecord& r : records) append_record(out, r);
  if (!out) throw std::runtime_error("failed writing records file: " + path.string());
}

std::vector<StoredRecord> read_records(const std::filesystem::path& path) {
  return parse_lines<StoredRecord>(path, &record_from_json);
}

void append_attack(std::ostream& out, const StoredAttack& stored) {
  json j;
  j["original_ids"] = stored.record.original;
  j["attacked_ids"] = stored.record.attacked;
  j["positions"] = stored.record.positions;
  j["fraction"] = stored.fraction;
  j["rng_seed"] = stored.rng_seed;
  out << j.dump() << '\n';
}

void write_attacks(const std::filesystem::path& path, std::span<const StoredAttack> attacks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open records file for writing: " + path.string());
  for (const StoredAttack& a : attacks) append_attack(out, a);
  if (!out) throw std::runtime_error("failed writing records file: " + path.string());
}

std::vector<StoredAttack> read_attacks(const std::filesystem::path& path) {
  return parse_lines<StoredAttack>(path, &attack_from_json);
}

}  // namespace tempmark
