#include <catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <future>

#include <nlohmann/json.hpp>

#include "support/stub_server.hpp"
#include "tensopt/core/files.hpp"
#include "tensopt/llm/backend.hpp"

using namespace tensopt;
using namespace tensopt::llm;
using tensopt::testing::StubServer;

namespace {

ModelSpec fast_spec(const std::string& endpoint) {
  ModelSpec m;
  m.endpoint = endpoint;
  m.model = "stub-model";
  m.timeout_s = 5;
  m.backoff_s = 0.01;
  m.max_retries = 2;
  return m;
}

// Nothing listens on port 1 of the loopback interface.
constexpr int kClosedPort = 1;

}  // namespace

TEST_CASE("http backend sends one user message and reads usage") {
  nlohmann::json seen;
  std::string auth;
  StubServer srv([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(StubServer::completion_body("OPTIMIZATION: unroll\nplan", 120, 30), "application/json");
  });
  ::setenv("TENSOPT_TEST_KEY", "sk-test-123", 1);
  auto spec = fast_spec(srv.endpoint());
  spec.api_key_env = "TENSOPT_TEST_KEY";
  HttpBackend b(spec);
  auto c = b.complete({Phase::Plan, "hello prompt"});
  REQUIRE(c.ok);
  CHECK(c.text == "OPTIMIZATION: unroll\nplan");
  CHECK(c.attempts == 1);
  CHECK(c.prompt_tokens == 120);
  CHECK(c.completion_tokens == 30);
  CHECK(auth == "Bearer sk-test-123");
  CHECK(seen["model"] == "stub-model");
  CHECK(seen["temperature"].get<double>() == 1.0);
  REQUIRE(seen["messages"].size() == 1);
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == "hello prompt");
  ::unsetenv("TENSOPT_TEST_KEY");
}

TEST_CASE("http backend omits the auth header without a key") {
  bool had_auth = true;
  StubServer srv([&](const httplib::Request& req, httplib::Response& res) {
    had_auth = req.has_header("Authorization");
    res.set_content(StubServer::completion_body("x"), "application/json");
  });
  auto spec = fast_spec(srv.endpoint());
  spec.api_key_env = "TENSOPT_TEST_KEY_UNSET_VARIABLE";
  HttpBackend b(spec);
  CHECK(b.complete({Phase::Code, "p"}).ok);
  CHECK_FALSE(had_auth);
}

TEST_CASE("transient failures are retried, permanent ones are not") {
  std::atomic<int> hits{0};
  SECTION("two 503s then success") {
    StubServer srv([&](const httplib::Request&, httplib::Response& res) {
      if (++hits <= 2) {
        res.status = 503;
        return;
      }
      res.set_content(StubServer::completion_body("ok"), "application/json");
    });
    HttpBackend b(fast_spec(srv.endpoint()));
    auto c = b.complete({Phase::Plan, "p"});
    CHECK(c.ok);
    CHECK(c.attempts == 3);
    CHECK(hits == 3);
  }
  SECTION("429 every time exhausts the retries") {
    StubServer srv([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 429;
    });
    HttpBackend b(fast_spec(srv.endpoint()));
    auto c = b.complete({Phase::Plan, "p"});
    CHECK_FALSE(c.ok);
    CHECK(c.attempts == 3);
    CHECK(hits == 3);
    CHECK(c.error.find("429") != std::string::npos);
  }
  SECTION("context-length style 400 fails at once") {
    StubServer srv([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 400;
      res.set_content(R"({"error":{"message":"maximum context length exceeded"}})", "application/json");
    });
    HttpBackend b(fast_spec(srv.endpoint()));
    auto c = b.complete({Phase::Code, "p"});
    CHECK_FALSE(c.ok);
    CHECK(c.attempts == 1);
    CHECK(hits == 1);
    CHECK(c.error.find("context length") != std::string::npos);
  }
  SECTION("empty completion is a failure") {
    StubServer srv([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.set_content(StubServer::completion_body(""), "application/json");
    });
    HttpBackend b(fast_spec(srv.endpoint()));
    auto c = b.complete({Phase::Code, "p"});
    CHECK_FALSE(c.ok);
    CHECK(c.error == "empty completion");
  }
  SECTION("malformed body is retried") {
    StubServer srv([&](const httplib::Request&, httplib::Response& res) {
      if (++hits == 1) {
        res.set_content("not json", "application/json");
        return;
      }
      res.set_content(StubServer::completion_body("fine"), "application/json");
    });
    HttpBackend b(fast_spec(srv.endpoint()));
    auto c = b.complete({Phase::Code, "p"});
    CHECK(c.ok);
    CHECK(c.attempts == 2);
  }
}

TEST_CASE("unreachable endpoint fails after 1 + max_retries attempts") {
  auto spec = fast_spec("http://127.0.0.1:" + std::to_string(kClosedPort) + "/v1/chat/completions");
  spec.max_retries = 2;
  HttpBackend b(spec);
  auto c = b.complete({Phase::Plan, "p"});
  CHECK_FALSE(c.ok);
  CHECK(c.attempts == 3);
  CHECK_FALSE(c.error.empty());
}

TEST_CASE("bad endpoint url is rejected without a request") {
  HttpBackend b(fast_spec("ftp://nowhere"));
  auto c = b.complete({Phase::Plan, "p"});
  CHECK_FALSE(c.ok);
  CHECK(c.attempts == 0);
}

TEST_CASE("in-flight limit caps concurrent requests") {
  std::atomic<int> now{0}, peak{0};
  StubServer srv([&](const httplib::Request&, httplib::Response& res) {
    int v = ++now;
    int p = peak.load();
    while (v > p && !peak.compare_exchange_weak(p, v)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --now;
    res.set_content(StubServer::completion_body("ok"), "application/json");
  });
  auto spec = fast_spec(srv.endpoint());
  spec.max_in_flight = 2;
  HttpBackend b(spec);
  std::vector<std::future<Completion>> fs;
  for (int i = 0; i < 6; ++i) fs.push_back(std::async(std::launch::async, [&] { return b.complete({Phase::Plan, "p"}); }));
  for (auto& f : fs) CHECK(f.get().ok);
  CHECK(peak.load() <= 2);
  CHECK(peak.load() >= 1);
}

TEST_CASE("model spec json round trip") {
  ModelSpec m;
  m.name = "m2";
  m.model = "some-model";
  m.temperature = 0.5;
  m.max_retries = 7;
  m.api_key_env = "OTHER_KEY";
  CHECK(model_from_json(to_json(m)) == m);
  CHECK(model_from_json(nlohmann::json::object()) == ModelSpec{});
}

TEST_CASE("ensemble assignment is balanced") {
  for (int n = 0; n <= 100; ++n) {
    for (int k = 1; k <= 5; ++k) {
      auto a = ensemble_assign(n, k);
      REQUIRE(a.size() == static_cast<std::size_t>(n));
      std::vector<int> count(k, 0);
      for (int m : a) {
        REQUIRE(m >= 0);
        REQUIRE(m < k);
        ++count[m];
      }
      auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      REQUIRE(*hi - *lo <= 1);
    }
  }
  CHECK(ensemble_assign(5, 2) == std::vector<int>{0, 1, 0, 1, 0});
  CHECK_THROWS(ensemble_assign(3, 0));
}

TEST_CASE("scripted backend replays per phase in order") {
  ScriptManifest m;
  m.entries = {{Phase::Plan, {}, "plan-1", 1},
               {Phase::Code, {}, "code-1", 1},
               {Phase::Plan, {}, "plan-2", 2},
               {Phase::Code, {"MARK"}, "code-marked", 0},
               {Phase::Code, {"BOTH", "ALSO"}, "code-both", 0}};
  ScriptedBackend b(m);
  CHECK_FALSE(b.concurrent());
  CHECK(b.complete({Phase::Plan, "a"}).text == "plan-1");
  CHECK(b.complete({Phase::Plan, "a"}).text == "plan-2");
  CHECK(b.complete({Phase::Code, "has MARK"}).text == "code-1");
  CHECK(b.complete({Phase::Code, "has MARK"}).text == "code-marked");
  CHECK(b.complete({Phase::Code, "MARK again"}).text == "code-marked");
  CHECK(b.complete({Phase::Code, "ALSO and BOTH"}).text == "code-both");
  CHECK_FALSE(b.complete({Phase::Code, "BOTH only"}).ok);
  auto miss = b.complete({Phase::Code, "nothing"});
  CHECK_FALSE(miss.ok);
  CHECK(miss.error.find("exhausted") != std::string::npos);
  CHECK(b.complete({Phase::Plan, "a"}).text == "plan-2");
  CHECK_FALSE(b.complete({Phase::Plan, "a"}).ok);
  CHECK(b.calls() == 10);
}

TEST_CASE("manifest files resolve relative to the manifest") {
  auto dir = std::filesystem::temp_directory_path() / "tensopt_manifest_test";
  std::filesystem::create_directories(dir);
  write_file(dir / "resp.txt", "from file");
  write_file(dir / "m.txt", "needle");
  write_file(dir / "manifest.json", R"({"entries":[
    {"phase":"code","match_file":"m.txt","response_file":"resp.txt","repeat":0},
    {"phase":"code","match":["a","b"],"match_file":["m.txt"],"response":"r"},
    {"phase":"plan","response":"inline"}]})");
  auto m = load_manifest(dir / "manifest.json");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].match == std::vector<std::string>{"needle"});
  CHECK(m.entries[1].match == std::vector<std::string>{"a", "b", "needle"});
  CHECK(m.entries[0].response == "from file");
  CHECK(m.entries[0].repeat == 0);
  CHECK(m.entries[2].repeat == 1);
  auto again = manifest_from_json(to_json(m));
  CHECK(again.entries == m.entries);
  CHECK_THROWS(manifest_from_json(nlohmann::json::parse(R"({"entries":[{"phase":"x","response":"r"}]})")));
  CHECK_THROWS(manifest_from_json(nlohmann::json::parse(R"({"entries":[{"phase":"plan"}]})")));
  std::filesystem::remove_all(dir);
}
