#pragma once

// Bridges an external next-token model into the LogitsProvider contract via
// line-delimited JSON over a child process's standard input/output:
//   request  {"context": [ids]}
//   response {"logits": [|V| reals]}
// One request per line, responses in order.

#include <memory>
#include <mutex>
#include <string>

#include "tempmark/logits_provider.hpp"

namespace tempmark {

class SubprocessProvider final : public LogitsProvider {
 public:
  // Spawns `command` through /bin/sh. The child must answer one response
  // line per request line until its stdin closes.
  SubprocessProvider(std::string command, int vocab_size);
  ~SubprocessProvider() override;

  SubprocessProvider(const SubprocessProvider&) = delete;
  SubprocessProvider& operator=(const SubprocessProvider&) = delete;

  int vocab_size() const override { return vocab_size_; }

  // Serialized across threads; throws std::runtime_error when the child
  // exits, misbehaves, or returns a malformed or wrong-length vector.
  LogitsVector logits(const TokenSeq& context) const override;

 private:
  struct Child;

  std::string command_;
  int vocab_size_;
  mutable std::mutex mutex_;
  mutable std::unique_ptr<Child> child_;
};

}  // namespace tempmark
