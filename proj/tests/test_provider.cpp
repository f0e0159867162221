// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include <ravel/http_provider.hpp>
#include <ravel/provider.hpp>

using namespace ravel;

namespace {

ChatRequest simple_request(const std::string& text) {
  ChatRequest r;
  r.model_name = "test-model";
  r.messages.push_back({"user", text});
  return r;
}

std::filesystem::path temp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("retry succeeds after transient failures within budget") {
  int calls = 0;
  std::vector<int> delays;
  RetryPolicy policy;
  policy.budget = 3;
  policy.base_delay_ms = 100;
  policy.sleep_fn = [&](int ms) { delays.push_back(ms); };

  auto response = complete_with_retry(
      [&]() -> Attempt {
        ++calls;
        if (calls < 3) return {Attempt::Kind::transient, {}, "HTTP 503"};
        return {Attempt::Kind::ok, {"hello", std::nullopt, {}}, ""};
      },
      policy);
  CHECK(response.text == "hello");
  CHECK(calls == 3);
  // Exponential backoff: monotone doubling from the base delay.
  REQUIRE(delays.size() == 2);
  CHECK(delays[0] == 100);
  CHECK(delays[1] == 200);
}

TEST_CASE("retry budget counts total attempts and surfaces the last cause") {
  int calls = 0;
  RetryPolicy policy;
  policy.budget = 4;
  policy.sleep_fn = [](int) {};
  CHECK_THROWS_WITH_AS(
      complete_with_retry(
          [&]() -> Attempt {
            ++calls;
            return {Attempt::Kind::transient, {},
                    "HTTP 429 #" + std::to_string(calls)};
          },
          policy),
      "retries exhausted, last cause: HTTP 429 #4", TransportError);
  CHECK(calls == 4);
}

TEST_CASE("fatal auth failures are never retried") {
  int calls = 0;
  RetryPolicy policy;
  policy.budget = 5;
  policy.sleep_fn = [](int) {};
  CHECK_THROWS_AS(complete_with_retry(
                      [&]() -> Attempt {
                        ++calls;
                        return {Attempt::Kind::fatal, {}, "HTTP 401"};
                      },
                      policy),
                  CredentialError);
  CHECK(calls == 1);
}

TEST_CASE("scripted provider pops the first matching entry") {
  ScriptedProvider p(std::vector<ScriptedProvider::Entry>{
      {"outline", "outline-reply"}, {"draft", "draft-reply"}, {"", "fallback"}});
  CHECK(p.complete(simple_request("please draft section 1")).text ==
        "draft-reply");
  CHECK(p.complete(simple_request("produce an outline")).text ==
        "outline-reply");
  CHECK(p.complete(simple_request("anything")).text == "fallback");
  CHECK_THROWS_AS(p.complete(simple_request("anything")), ScriptExhausted);
  CHECK(p.calls().size() == 4);
}

TEST_CASE("scripted provider matches against the last user message") {
  ScriptedProvider p(
      std::vector<ScriptedProvider::Entry>{{"needle", "found"}});
  ChatRequest r;
  r.messages.push_back({"system", "needle in the system prompt"});
  r.messages.push_back({"user", "no match here"});
  CHECK_THROWS_AS(p.complete(r), ScriptExhausted);
  p.push("needle", "found");
  r.messages.push_back({"assistant", "…"});
  r.messages.push_back({"user", "the needle is here"});
  CHECK(p.complete(r).text == "found");
}

TEST_CASE("scripted provider is safe under concurrent calls") {
  std::vector<std::string> replies(64, "r");
  ScriptedProvider p = ScriptedProvider::from_replies(replies);
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&] {
      for (int k = 0; k < 8; ++k) {
        p.complete(simple_request("x"));
        ++ok;
      }
    });
  for (auto& t : threads) t.join();
  CHECK(ok == 64);
  CHECK(p.remaining() == 0);
  CHECK(p.calls().size() == 64);
}

TEST_CASE("cassette round-trip: record then replay byte-identical replies") {
  auto path = temp_file("ravel_cassette_test.jsonl");
  ScriptedProvider inner({{"", "first"}, {"", "second"}, {"", "other"}});
  RecordingProvider recorder(inner, path.string());

  auto r1 = simple_request("same request");
  auto r2 = simple_request("different request");
  CHECK(recorder.complete(r1).text == "first");
  CHECK(recorder.complete(r1).text == "second");
  CHECK(recorder.complete(r2).text == "other");

  ReplayProvider replay(path.string());
  // Identical requests replay in recorded order, then repeat the last.
  CHECK(replay.complete(r1).text == "first");
  CHECK(replay.complete(r1).text == "second");
  CHECK(replay.complete(r1).text == "second");
  CHECK(replay.complete(r2).text == "other");
  CHECK_THROWS_AS(replay.complete(simple_request("never recorded")),
                  CassetteMiss);
  std::filesystem::remove(path);
}

TEST_CASE("request digest is stable and content-sensitive") {
  auto r1 = simple_request("hello");
  auto r2 = simple_request("hello");
  auto r3 = simple_request("world");
  CHECK(request_digest(r1) == request_digest(r2));
  CHECK(request_digest(r1) != request_digest(r3));
  r2.temperature = 0.2;
  CHECK(request_digest(r1) != request_digest(r2));
}

TEST_CASE("http provider: live server, auth, transient retry") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                int n = ++hits;
                if (req.get_header_value("Authorization") != "Bearer sekrit") {
                  res.status = 401;
                  return;
                }
                if (n == 1) {  // first call: transient, must be retried
                  res.status = 503;
                  return;
                }
                json body = json::parse(req.body);
                json reply = {
                    {"choices",
                     {{{"message",
                        {{"content",
                          "echo: " + body["messages"].back()["content"]
                                         .get<std::string>()}}}}}},
                    {"usage",
                     {{"prompt_tokens", 5}, {"completion_tokens", 7}}}};
                res.set_content(reply.dump(), "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderBinding binding;
  binding.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  binding.model_name = "test-model";
  binding.credential_env = "RAVEL_TEST_TOKEN";
  binding.retry_budget = 3;
  binding.backoff_base_ms = 1;

  SUBCASE("missing credential fails at construction naming the variable") {
    unsetenv("RAVEL_TEST_TOKEN");
    CHECK_THROWS_WITH_AS(HttpProvider{binding},
                         "environment variable not set: RAVEL_TEST_TOKEN",
                         CredentialError);
  }

  SUBCASE("bad token is fatal on the first attempt") {
    setenv("RAVEL_TEST_TOKEN", "wrong", 1);
    HttpProvider provider(binding);
    int before = hits;
    CHECK_THROWS_AS(provider.complete(simple_request("hi")), CredentialError);
    CHECK(hits == before + 1);
  }

  SUBCASE("transient 5xx is retried, then the reply parses") {
    setenv("RAVEL_TEST_TOKEN", "sekrit", 1);
    hits = 0;
    HttpProvider provider(binding);
    auto response = provider.complete(simple_request("ping"));
    CHECK(response.text == "echo: ping");
    REQUIRE(response.usage.has_value());
    CHECK(response.usage->prompt_tokens == 5);
    CHECK(response.usage->completion_tokens == 7);
    CHECK(hits == 2);
  }

  server.stop();
  server_thread.join();
}
