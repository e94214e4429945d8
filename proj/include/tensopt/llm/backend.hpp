#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tensopt::llm {

enum class Phase { Plan, Code };

std::string_view name_of(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

struct ModelSpec {
  std::string name = "model";  // label used in traces
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model;
  double temperature = 1.0;
  int max_tokens = 8192;
  double timeout_s = 300.0;
  int max_retries = 3;
  double backoff_s = 2.0;  // doubled after each failed attempt
  // Name of the environment variable holding the key. Keys never live in configs.
  std::string api_key_env = "TENSOPT_API_KEY";
  int max_in_flight = 8;

  bool operator==(const ModelSpec&) const = default;
};

nlohmann::json to_json(const ModelSpec& m);
ModelSpec model_from_json(const nlohmann::json& j);

struct Request {
  Phase phase = Phase::Plan;
  std::string prompt;
};

struct Completion {
  bool ok = false;
  std::string text;
  std::string error;
  int attempts = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const Request& r) = 0;
  virtual std::string label() const = 0;
  /// False when request order matters (scripted replay); callers then issue
  /// requests one at a time in a fixed order.
  virtual bool concurrent() const { return true; }
};

/// OpenAI-compatible chat-completions client: one user message per request.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(ModelSpec spec);
  Completion complete(const Request& r) override;
  std::string label() const override { return spec_.name; }
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  std::counting_semaphore<1024> slots_;
};

struct ScriptEntry {
  Phase phase = Phase::Plan;
  std::vector<std::string> match;  // prompt must contain every one of these
  std::string response;
  int repeat = 1;  // uses before the entry is spent; 0 means unlimited

  bool operator==(const ScriptEntry&) const = default;
};

struct ScriptManifest {
  std::vector<ScriptEntry> entries;
};

/// Reads a manifest JSON file: {"entries": [{phase, match | match_file,
/// response | response_file, repeat}]}. match and match_file take a string or
/// a list of strings. File references resolve against the manifest's directory.
ScriptManifest load_manifest(const std::filesystem::path& path);
ScriptManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ScriptManifest& m);

/// Deterministic replay. A request takes the first entry of its phase, in
/// manifest order, that still has uses left and whose match strings all occur
/// in the prompt. No such entry is a failed completion ("script exhausted").
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(ScriptManifest m, std::string label = "scripted");
  Completion complete(const Request& r) override;
  std::string label() const override { return label_; }
  bool concurrent() const override { return false; }
  int calls() const;

 private:
  mutable std::mutex mu_;
  ScriptManifest manifest_;
  std::vector<int> used_;
  std::string label_;
  int calls_ = 0;
};

/// Round-robin model index for each of `n_samples` samples over `n_models`.
std::vector<int> ensemble_assign(int n_samples, int n_models);

}  // namespace tensopt::llm
