// Proof generator clients: prompt text in, proof script text out.
#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cryptic/core.hpp"
#include "cryptic/lexicon.hpp"

namespace cryptic {

/// Transport or supply failure; the rewrite loop records it as FAIL.
class GeneratorUnavailable : public Error {
 public:
  using Error::Error;
};

class ProofGenerator {
 public:
  virtual ~ProofGenerator() = default;
  /// Must be safe to call from several threads at once.
  virtual std::string generate(const std::string& prompt) = 0;
};

/// Fields of the last `def proof(...)` stub in a prompt.
struct PromptRequest {
  std::string answer;
  std::string clue;
  std::string pattern;
  std::string definition;
  std::string wordplay;
};
std::optional<PromptRequest> extract_request(const std::string& prompt);

/// Compiles the prompt's wordplay into a proof. The first `corrupt_first_n`
/// responses for each (answer, clue) have one letter of a literal changed.
class CompilerMock : public ProofGenerator {
 public:
  explicit CompilerMock(std::shared_ptr<const Lexicon> lexicon, int corrupt_first_n = 0);
  std::string generate(const std::string& prompt) override;
  int calls() const;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  int corrupt_first_n_;
  mutable std::mutex mu_;
  std::map<std::string, int> seen_;
  int calls_ = 0;
};

/// Canned responses from a JSON-lines file. Each line has "response" and
/// optionally "answer"; keyed lines are served only to prompts for that
/// answer, in order, before the shared queue.
class ReplayMock : public ProofGenerator {
 public:
  static std::unique_ptr<ReplayMock> load(const std::filesystem::path& path);
  void add(std::string response, std::optional<std::string> answer = std::nullopt);
  std::string generate(const std::string& prompt) override;

 private:
  std::mutex mu_;
  std::deque<std::string> shared_;
  std::map<std::string, std::deque<std::string>> keyed_;
};

class FunctionGenerator : public ProofGenerator {
 public:
  explicit FunctionGenerator(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string generate(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

struct ChatConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model;
  std::string api_key_env = "CRYPTIC_API_KEY";
  double temperature = 0.7;
  int max_tokens = 1024;
  int concurrency = 4;
  int timeout_seconds = 120;
};

/// OpenAI-style chat completion over HTTPS.
class HttpChatGenerator : public ProofGenerator {
 public:
  /// Throws Error when the API key variable is unset or the endpoint is malformed.
  explicit HttpChatGenerator(ChatConfig config);
  std::string generate(const std::string& prompt) override;

 private:
  ChatConfig config_;
  std::string api_key_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace cryptic
