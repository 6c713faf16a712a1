#include "tempmark/ngram_lm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tempmark {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void corrupt(std::size_t byte_offset, const std::string& why) {
  throw std::runtime_error("corrupt model file at byte " + std::to_string(byte_offset) +
                           ": " + why);
}

}  // namespace

NGramModel NGramModel::train(const TokenSeq& corpus, int order, double k, int vocab_size) {
  if (order < 1) throw std::invalid_argument("order must be at least 1");
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be at least 2");
  if (corpus.size() < static_cast<std::size_t>(order)) {
    throw std::runtime_error("corpus too short");
  }
  for (TokenId id : corpus) {
    if (id < 0 || id >= vocab_size) throw std::invalid_argument("token id out of range");
  }

  NGramModel model(order, k, vocab_size);

  TokenSeq padded(static_cast<std::size_t>(order - 1), kBosId);
  padded.insert(padded.end(), corpus.begin(), corpus.end());

  const std::size_t ctx_len = static_cast<std::size_t>(order - 1);
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    TokenSeq ctx(padded.begin() + static_cast<std::ptrdiff_t>(t),
                 padded.begin() + static_cast<std::ptrdiff_t>(t + ctx_len));
    model.counts_[std::move(ctx)][corpus[t]] += 1;
  }
  return model;
}

TokenSeq NGramModel::context_key(const TokenSeq& context) const {
  const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
  TokenSeq key;
  key.reserve(ctx_len);
  if (context.size() >= ctx_len) {
    key.assign(context.end() - static_cast<std::ptrdiff_t>(ctx_len), context.end());
  } else {
    key.assign(ctx_len - context.size(), kBosId);
    key.insert(key.end(), context.begin(), context.end());
  }
  return key;
}

LogitsVector NGramModel::logits(const TokenSeq& context) const {
  const TokenSeq key = context_key(context);

  const std::map<TokenId, std::uint64_t>* successors = nullptr;
  std::uint64_t total = 0;
  if (const auto it = counts_.find(key); it != counts_.end()) {
    successors = &it->second;
    for (const auto& [tok, c] : *successors) total += c;
  }

  const double denom_log =
      std::log(static_cast<double>(total) + k_ * static_cast<double>(vocab_size_));
  const double unseen = std::log(k_) - denom_log;

  LogitsVector out(static_cast<std::size_t>(vocab_size_), unseen);
  if (successors != nullptr) {
    for (const auto& [tok, c] : *successors) {
      out[static_cast<std::size_t>(tok)] = std::log(static_cast<double>(c) + k_) - denom_log;
    }
  }
  return out;
}

std::uint64_t NGramModel::count(const TokenSeq& context, TokenId successor) const {
  const auto it = counts_.find(context_key(context));
  if (it == counts_.end()) return 0;
  const auto jt = it->second.find(successor);
  return jt == it->second.end() ? 0 : jt->second;
}

std::uint64_t NGramModel::context_total(const TokenSeq& context) const {
  const auto it = counts_.find(context_key(context));
  if (it == counts_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& [tok, c] : it->second) total += c;
  return total;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());

  out << "NGLM1\n";
  out << "order " << order_ << '\n';
  out << "k " << format_double(k_) << '\n';
  out << "vocab_size " << vocab_size_ << '\n';
  out << "contexts " << counts_.size() << '\n';
  for (const auto& [ctx, successors] : counts_) {
    out << 'C';
    for (TokenId id : ctx) out << ' ' << id;
    out << " S";
    for (const auto& [tok, c] : successors) out << ' ' << tok << ' ' << c;
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto next_line = [&](std::string& line) -> bool {
    if (pos >= content.size()) return false;
    const std::size_t start = pos;
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      line = content.substr(start);
      pos = content.size();
    } else {
      line = content.substr(start, nl - start);
      pos = nl + 1;
    }
    return true;
  };

  std::size_t line_start = 0;
  std::string line;
  auto expect_line = [&](const char* what) -> std::string {
    line_start = pos;
    if (!next_line(line)) corrupt(content.size(), std::string("missing ") + what);
    return line;
  };

  if (expect_line("magic header") != "NGLM1") corrupt(line_start, "bad magic header");

  auto parse_field = [&](const char* name) -> std::string {
    const std::string l = expect_line(name);
    const std::string prefix = std::string(name) + ' ';
    if (l.rfind(prefix, 0) != 0) corrupt(line_start, std::string("expected field ") + name);
    return l.substr(prefix.size());
  };

  int order = 0;
  double k = 0.0;
  int vocab_size = 0;
  std::size_t n_contexts = 0;
  try {
    order = std::stoi(parse_field("order"));
    k = std::stod(parse_field("k"));
    vocab_size = std::stoi(parse_field("vocab_size"));
    n_contexts = static_cast<std::size_t>(std::stoull(parse_field("contexts")));
  } catch (const std::exception&) {
    corrupt(line_start, "unparsable header field");
  }
  if (order < 1 || !(k > 0.0) || vocab_size < 2) corrupt(line_start, "invalid header values");

  NGramModel model(order, k, vocab_size);
  const std::size_t ctx_len = static_cast<std::size_t>(order - 1);

  for (std::size_t i = 0; i < n_contexts; ++i) {
    line_start = pos;
    if (!next_line(line)) corrupt(content.size(), "truncated context records");
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag != "C") corrupt(line_start, "expected context record");

    TokenSeq ctx;
    std::string tok;
    while (ls >> tok && tok != "S") {
      try {
        const int id = std::stoi(tok);
        if (id < 0 || id >= vocab_size) corrupt(line_start, "context token id out of range");
        ctx.push_back(id);
      } catch (const std::invalid_argument&) {
        corrupt(line_start, "unparsable context token");
      } catch (const std::out_of_range&) {
        corrupt(line_start, "unparsable context token");
      }
    }
    if (tok != "S") corrupt(line_start, "missing successor list");
    if (ctx.size() != ctx_len) corrupt(line_start, "context length does not match order");

    std::map<TokenId, std::uint64_t> successors;
    long long succ = 0;
    unsigned long long cnt = 0;
    while (ls >> succ) {
      if (!(ls >> cnt)) corrupt(line_start, "successor without count");
      if (succ < 0 || succ >= vocab_size) corrupt(line_start, "successor id out of range");
      if (cnt == 0) corrupt(line_start, "zero successor count");
      successors[static_cast<TokenId>(succ)] = cnt;
    }
    if (!ls.eof()) corrupt(line_start, "trailing garbage in context record");
    if (successors.empty()) corrupt(line_start, "empty successor list");
    model.counts_[std::move(ctx)] = std::move(successors);
  }
  if (model.counts_.size() != n_contexts) corrupt(pos, "duplicate context records");
  if (pos < content.size()) corrupt(pos, "trailing data after context records");

  return model;
}

}  // namespace tempmark
