#include "tempmark/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace tempmark {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

bool matches_reserved(std::string_view text, std::size_t pos, std::string_view surface) {
  if (pos + surface.size() > text.size()) return false;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + i]))) !=
        surface[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };

  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (matches_reserved(text, i, kBosSurface)) {
      flush();
      tokens.emplace_back(kBosSurface);
      i += std::char_traits<char>::length(kBosSurface);
    } else if (matches_reserved(text, i, kUnkSurface)) {
      flush();
      tokens.emplace_back(kUnkSurface);
      i += std::char_traits<char>::length(kUnkSurface);
    } else if (is_space(c)) {
      flush();
      ++i;
    } else if (is_punct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
      ++i;
    }
  }
  flush();
  return tokens;
}

Vocab::Vocab(std::vector<std::string> surfaces) : surfaces_(std::move(surfaces)) {
  if (surfaces_.size() < 2 || surfaces_[0] != kBosSurface || surfaces_[1] != kUnkSurface) {
    throw std::runtime_error("vocabulary must start with the reserved <bos>, <unk> entries");
  }
  index_.reserve(surfaces_.size());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const auto [it, inserted] = index_.emplace(surfaces_[i], static_cast<TokenId>(i));
    if (!inserted) throw std::runtime_error("duplicate vocabulary entry: " + surfaces_[i]);
  }
}

TokenId Vocab::id_of(std::string_view surface) const {
  const auto it = index_.find(std::string(surface));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::surface(TokenId id) const {
  if (id < 0 || id >= size()) throw std::runtime_error("invalid token id");
  return surfaces_[static_cast<std::size_t>(id)];
}

Vocab build_vocab(std::string_view corpus_text, std::size_t max_size) {
  if (max_size < 2) throw std::invalid_argument("max_size must be at least 2");

  const std::vector<std::string> tokens = tokenize(corpus_text);
  if (tokens.empty()) throw std::runtime_error("empty corpus");

  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok == kBosSurface || tok == kUnkSurface) continue;  // reserved stay reserved
    auto [it, inserted] = freq.try_emplace(tok, Entry{0, i});
    it->second.count += 1;
  }

  std::vector<const std::pair<const std::string, Entry>*> entries;
  entries.reserve(freq.size());
  for (const auto& kv : freq) entries.push_back(&kv);
  std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
    if (a->second.count != b->second.count) return a->second.count > b->second.count;
    return a->second.first_seen < b->second.first_seen;
  });

  std::vector<std::string> surfaces{kBosSurface, kUnkSurface};
  const std::size_t keep = std::min(entries.size(), max_size - 2);
  for (std::size_t i = 0; i < keep; ++i) surfaces.push_back(entries[i]->first);
  return Vocab(std::move(surfaces));
}

TokenSeq encode(std::string_view text, const Vocab& vocab) {
  TokenSeq ids;
  for (const std::string& tok : tokenize(text)) ids.push_back(vocab.id_of(tok));
  return ids;
}

std::string decode(const TokenSeq& seq, const Vocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) out += ' ';
    out += vocab.surface(seq[i]);
  }
  return out;
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open vocabulary file for writing: " + path.string());
  for (const std::string& s : vocab.surfaces()) out << s << '\n';
  if (!out) throw std::runtime_error("failed writing vocabulary file: " + path.string());
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path.string());
  std::vector<std::string> surfaces;
  std::string line;
  while (std::getline(in, line)) surfaces.push_back(line);
  return Vocab(std::move(surfaces));
}

}  // namespace tempmark
