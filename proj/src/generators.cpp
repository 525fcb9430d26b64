#include "cryptic/generators.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "cryptic/formalize.hpp"
#include "cryptic/verifier.hpp"

// After Eigen: resolv.h defines _res as a macro.
#include <httplib.h>

namespace cryptic {

std::optional<PromptRequest> extract_request(const std::string& prompt) {
  const auto at = prompt.rfind("def proof(");
  if (at == std::string::npos) return std::nullopt;
  const auto doc_open = prompt.find("\"\"\"", at);
  if (doc_open == std::string::npos) return std::nullopt;
  const auto doc_close = prompt.find("\"\"\"", doc_open + 3);
  if (doc_close == std::string::npos) return std::nullopt;
  try {
    const ProofScript stub = parse_proof(prompt.substr(at, doc_close + 3 - at));
    return PromptRequest{stub.header.answer, stub.header.clue, stub.header.pattern, stub.definition, stub.wordplay};
  } catch (const Error&) {
    return std::nullopt;
  }
}

namespace {

// Changes one letter of the first capital-letter literal found.
bool corrupt(ProofScript& proof) {
  auto bump = [](std::string& text) {
    for (auto& c : text) {
      if (c >= 'A' && c <= 'Z') {
        c = c == 'Z' ? 'A' : static_cast<char>(c + 1);
        return true;
      }
    }
    return false;
  };
  for (auto& s : proof.statements) {
    if (auto* p = std::get_if<stmt::AssertPredicate>(&s.value)) {
      for (auto it = p->args.rbegin(); it != p->args.rend(); ++it) {
        if (auto* lit = std::get_if<expr::StringLit>(&it->value); lit && bump(lit->text)) return true;
      }
    } else if (auto* e = std::get_if<stmt::AssertEquality>(&s.value)) {
      if (auto* lit = std::get_if<expr::StringLit>(&e->rhs.value); lit && bump(lit->text)) return true;
    }
  }
  return false;
}

}  // namespace

CompilerMock::CompilerMock(std::shared_ptr<const Lexicon> lexicon, int corrupt_first_n)
    : lexicon_(std::move(lexicon)), corrupt_first_n_(corrupt_first_n) {}

int CompilerMock::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string CompilerMock::generate(const std::string& prompt) {
  const auto req = extract_request(prompt);
  if (!req) return "# no proof request found in prompt\n";
  int nth = 0;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    nth = seen_[req->answer + "\n" + req->clue]++;
  }
  ProofRequest request;
  request.clue.surface = req->clue;
  try {
    request.clue.pattern = Pattern::parse(req->pattern);
  } catch (const PatternError&) {
    request.clue.pattern = Pattern({static_cast<int>(normalize_letters(req->answer).size())}, {});
  }
  request.candidate_answer = req->answer;
  request.definition = req->definition;
  request.wordplay = req->wordplay;

  ProofScript proof;
  try {
    proof = compile_request(request, lexicon_.get());
  } catch (const Error& e) {
    proof.header = {normalize_letters(req->answer), req->clue, req->pattern};
    proof.definition = req->definition;
    proof.wordplay = req->wordplay;
    return "# could not formalise the wordplay: " + std::string(e.what()) + "\n" + render_proof(proof);
  }
  if (nth < corrupt_first_n_) corrupt(proof);
  return render_proof(proof);
}

std::unique_ptr<ReplayMock> ReplayMock::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open replay file " + path.string());
  auto mock = std::make_unique<ReplayMock>();
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
    if (!j.contains("response") || !j["response"].is_string()) {
      throw Error(path.string() + ":" + std::to_string(number) + ": missing \"response\" string");
    }
    std::optional<std::string> answer;
    if (j.contains("answer") && j["answer"].is_string()) answer = j["answer"].get<std::string>();
    mock->add(j["response"].get<std::string>(), answer);
  }
  return mock;
}

void ReplayMock::add(std::string response, std::optional<std::string> answer) {
  std::lock_guard lock(mu_);
  if (answer) {
    keyed_[normalize_letters(*answer)].push_back(std::move(response));
  } else {
    shared_.push_back(std::move(response));
  }
}

std::string ReplayMock::generate(const std::string& prompt) {
  const auto req = extract_request(prompt);
  std::lock_guard lock(mu_);
  if (req) {
    auto it = keyed_.find(normalize_letters(req->answer));
    if (it != keyed_.end() && !it->second.empty()) {
      std::string r = std::move(it->second.front());
      it->second.pop_front();
      return r;
    }
  }
  if (shared_.empty()) throw GeneratorUnavailable("replay responses exhausted");
  std::string r = std::move(shared_.front());
  shared_.pop_front();
  return r;
}

HttpChatGenerator::HttpChatGenerator(ChatConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw Error("live generator needs the " + config_.api_key_env + " environment variable");
  api_key_ = key;
  if (config_.model.empty()) throw Error("live generator needs a model name");
  if (config_.concurrency < 1) throw Error("live generator concurrency must be >= 1");
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint must be a URL: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpChatGenerator::generate(const std::string& prompt) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.concurrency; });
    ++in_flight_;
  }
  struct Release {
    HttpChatGenerator* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  nlohmann::json body = {{"model", config_.model},
                         {"temperature", config_.temperature},
                         {"max_tokens", config_.max_tokens},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw GeneratorUnavailable("request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw GeneratorUnavailable("HTTP " + std::to_string(res->status) + " from " + origin_ + path_);
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw GeneratorUnavailable(std::string("unexpected response body: ") + e.what());
  }
}

}  // namespace cryptic
