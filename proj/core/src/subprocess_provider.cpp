#include "tempmark/subprocess_provider.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "json.hpp"

namespace tempmark {

namespace {
using nlohmann::json;
}

struct SubprocessProvider::Child {
  pid_t pid = -1;
  FILE* to_child = nullptr;    // our write end
  FILE* from_child = nullptr;  // our read end

  ~Child() {
    if (to_child != nullptr) std::fclose(to_child);
    if (from_child != nullptr) std::fclose(from_child);
    if (pid > 0) {
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == 0) {
        kill(pid, SIGTERM);
        waitpid(pid, &status, 0);
      }
    }
  }
};

SubprocessProvider::SubprocessProvider(std::string command, int vocab_size)
    : command_(std::move(command)), vocab_size_(vocab_size) {
  if (vocab_size_ < 2) throw std::invalid_argument("vocab_size must be at least 2");
  if (command_.empty()) throw std::invalid_argument("provider command must be nonempty");

  // A dying child must surface as an error on the next request, not SIGPIPE.
  static const bool sigpipe_ignored = [] {
    signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  int to_child_pipe[2];
  int from_child_pipe[2];
  if (pipe(to_child_pipe) != 0) throw std::runtime_error("pipe failed");
  if (pipe(from_child_pipe) != 0) {
    close(to_child_pipe[0]);
    close(to_child_pipe[1]);
    throw std::runtime_error("pipe failed");
  }

  const pid_t pid = fork();
  if (pid < 0) {
    close(to_child_pipe[0]);
    close(to_child_pipe[1]);
    close(from_child_pipe[0]);
    close(from_child_pipe[1]);
    throw std::runtime_error("fork failed");
  }

  if (pid == 0) {
    dup2(to_child_pipe[0], STDIN_FILENO);
    dup2(from_child_pipe[1], STDOUT_FILENO);
    close(to_child_pipe[0]);
    close(to_child_pipe[1]);
    close(from_child_pipe[0]);
    close(from_child_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(to_child_pipe[0]);
  close(from_child_pipe[1]);

  child_ = std::make_unique<Child>();
  child_->pid = pid;
  child_->to_child = fdopen(to_child_pipe[1], "w");
  child_->from_child = fdopen(from_child_pipe[0], "r");
  if (child_->to_child == nullptr || child_->from_child == nullptr) {
    child_.reset();
    throw std::runtime_error("fdopen failed for provider pipes");
  }
}

SubprocessProvider::~SubprocessProvider() = default;

LogitsVector SubprocessProvider::logits(const TokenSeq& context) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!child_) throw std::runtime_error("provider process is not running");

  json request;
  request["context"] = context;
  const std::string line = request.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), child_->to_child) != line.size() ||
      std::fflush(child_->to_child) != 0) {
    child_.reset();
    throw std::runtime_error("provider process closed its input");
  }

  std::string response;
  int c = 0;
  while ((c = std::fgetc(child_->from_child)) != EOF && c != '\n') {
    response.push_back(static_cast<char>(c));
  }
  if (response.empty() && c == EOF) {
    child_.reset();
    throw std::runtime_error("provider process closed its output");
  }

  json parsed = json::parse(response, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("logits") || !parsed["logits"].is_array()) {
    child_.reset();
    throw std::runtime_error("malformed provider response: " + response);
  }

  LogitsVector out;
  try {
    out = parsed["logits"].get<LogitsVector>();
  } catch (const json::exception&) {
    child_.reset();
    throw std::runtime_error("malformed provider response: " + response);
  }
  if (out.size() != static_cast<std::size_t>(vocab_size_)) {
    child_.reset();
    throw std::runtime_error("provider returned " + std::to_string(out.size()) +
                             " logits, expected " + std::to_string(vocab_size_));
  }
  for (double v : out) {
    if (!std::isfinite(v)) {
      child_.reset();
      throw std::runtime_error("provider returned non-finite logits");
    }
  }
  return out;
}

}  // namespace tempmark
