// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>

#include "ravel/provider.hpp"

namespace ravel {

/// Chat-completions HTTP client: messages array in, choices[0].message.content
/// out. Transient failures (connection errors, 429, 5xx) are retried with
/// exponential backoff; auth failures surface immediately and are never
/// retried. Secrets come only from the environment variable named in the
/// binding.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderBinding binding) : binding_(std::move(binding)) {
    split_endpoint();
    if (!binding_.credential_env.empty()) {
      const char* token = std::getenv(binding_.credential_env.c_str());
      if (!token)
        throw CredentialError("environment variable not set: " +
                              binding_.credential_env);
      token_ = token;
    }
  }

  ChatResponse complete(const ChatRequest& request) override {
    RetryPolicy policy;
    policy.budget = binding_.retry_budget;
    policy.base_delay_ms = binding_.backoff_base_ms;
    auto start = std::chrono::steady_clock::now();
    ChatResponse r =
        complete_with_retry([&] { return attempt(request); }, policy);
    r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return r;
  }

 private:
  Attempt attempt(const ChatRequest& request) {
    httplib::Client client(host_);
    client.set_connection_timeout(binding_.timeout_ms / 1000,
                                  (binding_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(binding_.timeout_ms / 1000,
                            (binding_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!token_.empty())
      headers.emplace("Authorization", "Bearer " + token_);

    ChatRequest body = request;
    if (body.model_name.empty()) body.model_name = binding_.model_name;
    auto res = client.Post(path_ + "/chat/completions", headers,
                           request_to_json(body).dump(), "application/json");
    if (!res)
      return {Attempt::Kind::transient, {}, "connection failure"};
    if (res->status == 401 || res->status == 403)
      return {Attempt::Kind::fatal, {},
              "authentication failure (HTTP " + std::to_string(res->status) + ")"};
    if (res->status == 429 || res->status >= 500)
      return {Attempt::Kind::transient, {},
              "HTTP " + std::to_string(res->status)};
    if (res->status != 200)
      return {Attempt::Kind::fatal, {},
              "HTTP " + std::to_string(res->status) + ": " + res->body};

    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
      return {Attempt::Kind::transient, {}, "unparsable completion body"};
    ChatResponse out;
    out.text = j["choices"][0]["message"]["content"].get<std::string>();
    if (j.contains("usage")) {
      out.usage = Usage{j["usage"].value("prompt_tokens", 0),
                        j["usage"].value("completion_tokens", 0)};
    }
    return {Attempt::Kind::ok, std::move(out), ""};
  }

  void split_endpoint() {
    // endpoint is scheme://host[:port][/base-path]
    auto pos = binding_.endpoint.find("://");
    std::size_t host_start = pos == std::string::npos ? 0 : pos + 3;
    auto slash = binding_.endpoint.find('/', host_start);
    if (slash == std::string::npos) {
      host_ = binding_.endpoint;
      path_ = "";
    } else {
      host_ = binding_.endpoint.substr(0, slash);
      path_ = binding_.endpoint.substr(slash);
      while (!path_.empty() && path_.back() == '/') path_.pop_back();
    }
  }

  ProviderBinding binding_;
  std::string host_;
  std::string path_;
  std::string token_;
};

}  // namespace ravel
