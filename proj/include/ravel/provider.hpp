// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ravel/common.hpp"

namespace ravel {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  std::optional<int> max_output;
  std::string model_name;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<Usage> usage;
  std::chrono::milliseconds latency{0};
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CredentialError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScriptExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CassetteMiss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderBinding {
  std::string endpoint;        // base URL of a chat-completions service
  std::string model_name;
  std::string credential_env;  // env var holding the bearer token
  int retry_budget = 3;        // total attempts
  int timeout_ms = 60000;
  int backoff_base_ms = 200;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

inline ordered_json request_to_json(const ChatRequest& r) {
  ordered_json j;
  j["model"] = r.model_name;
  j["messages"] = ordered_json::array();
  for (const auto& m : r.messages)
    j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["temperature"] = r.temperature;
  if (r.max_output) j["max_tokens"] = *r.max_output;
  return j;
}

inline std::string request_digest(const ChatRequest& r) {
  return hex_digest(request_to_json(r).dump());
}

// ---------------------------------------------------------------------------
// Retry machinery, shared by the HTTP provider and fault-injection tests.

struct Attempt {
  enum class Kind { ok, transient, fatal } kind;
  ChatResponse response;   // valid when ok
  std::string error;       // valid otherwise
};

struct RetryPolicy {
  int budget = 3;       // total attempts, >= 1
  int base_delay_ms = 200;
  // Injectable sleeper; tests pass a recorder, production sleeps.
  std::function<void(int)> sleep_fn = [](int ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  };
};

/// Runs `attempt` up to policy.budget times with exponential backoff on
/// transient failures. Fatal failures (auth) surface immediately.
inline ChatResponse complete_with_retry(const std::function<Attempt()>& attempt,
                                        const RetryPolicy& policy) {
  int budget = policy.budget < 1 ? 1 : policy.budget;
  std::string last_error = "no attempt made";
  for (int i = 0; i < budget; ++i) {
    if (i > 0) policy.sleep_fn(policy.base_delay_ms * (1 << (i - 1)));
    Attempt a = attempt();
    switch (a.kind) {
      case Attempt::Kind::ok:
        return a.response;
      case Attempt::Kind::fatal:
        throw CredentialError(a.error);
      case Attempt::Kind::transient:
        last_error = a.error;
        break;
    }
  }
  throw TransportError("retries exhausted, last cause: " + last_error);
}

// ---------------------------------------------------------------------------

/// Deterministic provider for tests and golden episodes. Each call pops the
/// first entry whose matcher (substring of the last user message, empty
/// matches anything) fires.
class ScriptedProvider : public Provider {
 public:
  struct Entry {
    std::string match;  // substring predicate; empty matches any prompt
    std::string reply;
  };

  ScriptedProvider() = default;
  explicit ScriptedProvider(std::vector<Entry> script)
      : script_(script.begin(), script.end()) {}
  ScriptedProvider(ScriptedProvider&& other) noexcept {
    std::lock_guard lock(other.mu_);
    script_ = std::move(other.script_);
    calls_ = std::move(other.calls_);
  }

  /// Convenience: plain FIFO script (every matcher empty).
  static ScriptedProvider from_replies(const std::vector<std::string>& replies) {
    std::vector<Entry> entries;
    for (const auto& r : replies) entries.push_back({"", r});
    return ScriptedProvider(std::move(entries));
  }

  void push(std::string match, std::string reply) {
    std::lock_guard lock(mu_);
    script_.push_back({std::move(match), std::move(reply)});
  }

  ChatResponse complete(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    calls_.push_back(request);
    std::string last_user;
    for (auto it = request.messages.rbegin(); it != request.messages.rend();
         ++it) {
      if (it->role == "user") {
        last_user = it->content;
        break;
      }
    }
    for (auto it = script_.begin(); it != script_.end(); ++it) {
      if (it->match.empty() || last_user.find(it->match) != std::string::npos) {
        ChatResponse r;
        r.text = it->reply;
        r.usage = Usage{static_cast<int>(last_user.size() / 4),
                        static_cast<int>(it->reply.size() / 4)};
        script_.erase(it);
        return r;
      }
    }
    throw ScriptExhausted("scripted provider has no entry matching prompt");
  }

  std::size_t remaining() const {
    std::lock_guard lock(mu_);
    return script_.size();
  }
  std::vector<ChatRequest> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<Entry> script_;
  std::vector<ChatRequest> calls_;
};

// ---------------------------------------------------------------------------
// Record/replay cassettes: line-delimited (digest, request, response) records.

class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, std::string cassette_path)
      : inner_(inner), path_(std::move(cassette_path)) {}

  ChatResponse complete(const ChatRequest& request) override {
    ChatResponse response = inner_.complete(request);
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot write cassette: " + path_);
    ordered_json line;
    line["digest"] = request_digest(request);
    line["request"] = request_to_json(request);
    line["response"]["text"] = response.text;
    if (response.usage) {
      line["response"]["usage"] = {
          {"prompt_tokens", response.usage->prompt_tokens},
          {"completion_tokens", response.usage->completion_tokens}};
    }
    out << line.dump() << "\n";
    return response;
  }

 private:
  Provider& inner_;
  std::string path_;
  std::mutex mu_;
};

class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::string& cassette_path) {
    std::ifstream in(cassette_path);
    if (!in)
      throw std::runtime_error("cannot read cassette: " + cassette_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      ChatResponse r;
      r.text = j.at("response").at("text").get<std::string>();
      if (j.at("response").contains("usage")) {
        r.usage = Usage{j["response"]["usage"]["prompt_tokens"].get<int>(),
                        j["response"]["usage"]["completion_tokens"].get<int>()};
      }
      by_digest_[j.at("digest").get<std::string>()].push_back(std::move(r));
    }
  }

  ChatResponse complete(const ChatRequest& request) override {
    std::string digest = request_digest(request);
    std::lock_guard lock(mu_);
    auto it = by_digest_.find(digest);
    if (it == by_digest_.end())
      throw CassetteMiss("cassette has no entry for digest " + digest);
    auto& queue = it->second;
    auto& cursor = cursors_[digest];
    // Identical requests replay in recorded order; once exhausted the last
    // response repeats (identical request, identical reply).
    ChatResponse r = queue[std::min(cursor, queue.size() - 1)];
    ++cursor;
    return r;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<ChatResponse>> by_digest_;
  std::map<std::string, std::size_t> cursors_;
};

}  // namespace ravel
