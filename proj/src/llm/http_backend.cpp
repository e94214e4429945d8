#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "tensopt/llm/backend.hpp"

namespace tensopt::llm {
namespace {

struct Url {
  std::string scheme_host_port;  // "https://host:443"
  std::string path;
};

std::optional<Url> split_url(const std::string& u) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(u, m, re)) return std::nullopt;
  return Url{m[1].str(), m[2].matched ? m[2].str() : "/"};
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

// Holds an in-flight slot for the lifetime of one request.
struct SlotGuard {
  std::counting_semaphore<1024>& s;
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : s(sem) { s.acquire(); }
  ~SlotGuard() { s.release(); }
};

}  // namespace

nlohmann::json to_json(const ModelSpec& m) {
  return {{"name", m.name},           {"endpoint", m.endpoint},       {"model", m.model},
          {"temperature", m.temperature}, {"max_tokens", m.max_tokens}, {"timeout_s", m.timeout_s},
          {"max_retries", m.max_retries}, {"backoff_s", m.backoff_s},   {"api_key_env", m.api_key_env},
          {"max_in_flight", m.max_in_flight}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.name = j.value("name", m.name);
  m.endpoint = j.value("endpoint", m.endpoint);
  m.model = j.value("model", m.model);
  m.temperature = j.value("temperature", m.temperature);
  m.max_tokens = j.value("max_tokens", m.max_tokens);
  m.timeout_s = j.value("timeout_s", m.timeout_s);
  m.max_retries = j.value("max_retries", m.max_retries);
  m.backoff_s = j.value("backoff_s", m.backoff_s);
  m.api_key_env = j.value("api_key_env", m.api_key_env);
  m.max_in_flight = j.value("max_in_flight", m.max_in_flight);
  return m;
}

HttpBackend::HttpBackend(ModelSpec spec)
    : spec_(std::move(spec)), slots_(std::clamp(spec_.max_in_flight, 1, 1024)) {}

Completion HttpBackend::complete(const Request& r) {
  Completion out;
  auto url = split_url(spec_.endpoint);
  if (!url) {
    out.error = "bad endpoint url: " + spec_.endpoint;
    return out;
  }
  std::string key;
  if (const char* k = std::getenv(spec_.api_key_env.c_str())) key = k;

  const nlohmann::json body{{"model", spec_.model},
                            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", r.prompt}}})},
                            {"temperature", spec_.temperature},
                            {"max_tokens", spec_.max_tokens}};
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  SlotGuard slot(slots_);
  double wait = spec_.backoff_s;
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      wait *= 2;
    }
    out.attempts = attempt + 1;
    httplib::Client cli(url->scheme_host_port);
    auto to = std::chrono::duration<double>(spec_.timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    auto res = cli.Post(url->path, headers, payload, "application/json");
    if (!res) {
      out.error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      out.error = fmt::format("http {}: {}", res->status, res->body.substr(0, 400));
      if (transient_status(res->status)) continue;
      return out;
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
      out.error = "malformed completion response";
      continue;
    }
    const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
    std::string text = msg.value("content", std::string{});
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      out.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    if (text.empty()) {
      out.error = "empty completion";
      return out;
    }
    out.ok = true;
    out.error.clear();
    out.text = std::move(text);
    return out;
  }
  return out;
}

}  // namespace tensopt::llm
