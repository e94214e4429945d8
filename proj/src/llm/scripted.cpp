#include <algorithm>
#include <stdexcept>

#include "tensopt/core/files.hpp"
#include "tensopt/llm/backend.hpp"

namespace tensopt::llm {

ScriptManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ScriptManifest m;
  const auto& entries = j.is_array() ? j : j.at("entries");
  for (const auto& e : entries) {
    ScriptEntry s;
    auto phase = parse_phase(e.at("phase").get<std::string>());
    if (!phase) throw std::invalid_argument("script entry phase must be plan or code");
    s.phase = *phase;
    auto strings = [](const nlohmann::json& v) {
      return v.is_array() ? v.get<std::vector<std::string>>() : std::vector<std::string>{v.get<std::string>()};
    };
    if (e.contains("match")) s.match = strings(e["match"]);
    if (e.contains("match_file")) {
      for (const auto& f : strings(e["match_file"])) s.match.push_back(read_file(base_dir / f));
    }
    if (e.contains("response")) {
      s.response = e["response"].get<std::string>();
    } else if (e.contains("response_file")) {
      s.response = read_file(base_dir / e["response_file"].get<std::string>());
    } else {
      throw std::invalid_argument("script entry needs response or response_file");
    }
    s.repeat = e.value("repeat", 1);
    if (s.repeat < 0) throw std::invalid_argument("script entry repeat must be >= 0");
    m.entries.push_back(std::move(s));
  }
  return m;
}

ScriptManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(nlohmann::json::parse(read_file(path)), path.parent_path());
}

nlohmann::json to_json(const ScriptManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j{{"phase", name_of(e.phase)}, {"response", e.response}, {"repeat", e.repeat}};
    if (!e.match.empty()) j["match"] = e.match;
    entries.push_back(std::move(j));
  }
  return {{"entries", entries}};
}

ScriptedBackend::ScriptedBackend(ScriptManifest m, std::string label)
    : manifest_(std::move(m)), used_(manifest_.entries.size(), 0), label_(std::move(label)) {}

Completion ScriptedBackend::complete(const Request& r) {
  std::lock_guard lock(mu_);
  ++calls_;
  Completion c;
  c.attempts = 1;
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
    const auto& e = manifest_.entries[i];
    if (e.phase != r.phase) continue;
    if (e.repeat != 0 && used_[i] >= e.repeat) continue;
    bool hit = std::all_of(e.match.begin(), e.match.end(),
                           [&](const std::string& m) { return r.prompt.find(m) != std::string::npos; });
    if (!hit) continue;
    ++used_[i];
    c.ok = true;
    c.text = e.response;
    return c;
  }
  c.error = std::string("script exhausted for ") + std::string(name_of(r.phase)) + " request";
  return c;
}

int ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace tensopt::llm
