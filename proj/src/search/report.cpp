#include "tensopt/search/report.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace tensopt::search {
namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ReportError(fmt::format("trace record lacks '{}'", key));
  return j[key];
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(fmt::format("trace field '{}': {}", key, e.what()));
  }
}

struct VerdictInfo {
  std::optional<int> parent;
  std::string menu_option;
  std::int64_t latency = 0;
};

}  // namespace

std::vector<nlohmann::json> parse_trace(const std::string& jsonl) {
  std::vector<nlohmann::json> out;
  std::istringstream in(jsonl);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ReportError(fmt::format("trace line {} is not a JSON object", n));
    out.push_back(std::move(j));
  }
  return out;
}

std::string format_trace(const std::vector<nlohmann::json>& trace) {
  std::string s;
  for (const auto& r : trace) {
    s += r.dump();
    s += '\n';
  }
  return s;
}

Report build_report(const std::vector<nlohmann::json>& trace) {
  static const std::set<std::string> kinds{"plan_request", "plan_response", "code_request",
                                           "code_response", "verdict", "beam"};
  Report r;
  std::map<int, VerdictInfo> verdicts;
  std::map<std::string, std::int64_t> calls_by_phase;
  std::int64_t prev_calls = 0;
  std::int64_t best = 0;
  bool have_root = false;
  int best_id = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> gains;  // (call index, latency)

  for (const auto& rec : trace) {
    const auto kind = get<std::string>(rec, "kind");
    if (!kinds.count(kind)) throw ReportError("unknown trace record kind: " + kind);
    get<int>(rec, "iteration");
    const auto& ids = field(rec, "ids");
    const auto& payload = field(rec, "payload");
    if (kind == "verdict") {
      const int id = get<int>(ids, "candidate");
      VerdictInfo v;
      if (ids.contains("parent")) v.parent = get<int>(ids, "parent");
      v.menu_option = payload.value("menu_option", std::string{});
      v.latency = payload.contains("latency") ? get<std::int64_t>(payload, "latency") : 0;
      if (get<std::string>(payload, "phase") == "root") {
        have_root = true;
        r.start_latency = best = v.latency;
      } else {
        ++r.evaluated;
        r.correct += get<bool>(payload, "correct") ? 1 : 0;
        if (get<bool>(payload, "accepted")) {
          ++r.accepted;
          gains.emplace_back(get<std::int64_t>(payload, "call_index"), v.latency);
        }
      }
      verdicts[id] = v;
    } else if (kind == "beam") {
      if (!have_root) throw ReportError("beam record before the root verdict");
      IterationRow row;
      row.iteration = get<int>(rec, "iteration");
      row.phase = get<std::string>(payload, "phase");
      const auto& b = field(payload, "best");
      row.best_latency = get<std::int64_t>(b, "latency");
      best_id = get<int>(b, "id");
      row.speedup = static_cast<double>(r.start_latency) / static_cast<double>(row.best_latency);
      const auto& calls = field(payload, "calls");
      row.plan_calls = get<std::int64_t>(calls, "plan");
      row.code_calls = get<std::int64_t>(calls, "code");
      row.failed_calls = get<std::int64_t>(calls, "failed");
      const auto& tokens = field(payload, "tokens");
      row.prompt_tokens = get<std::int64_t>(tokens, "prompt");
      row.completion_tokens = get<std::int64_t>(tokens, "completion");
      const auto& cands = field(payload, "candidates");
      row.evaluated = get<int>(cands, "evaluated");
      row.correct = get<int>(cands, "correct");
      row.accepted = get<int>(cands, "accepted");
      row.beam_size = static_cast<int>(field(payload, "members").size());
      const std::int64_t total = row.plan_calls + row.code_calls;
      calls_by_phase[row.phase] += total - prev_calls;
      prev_calls = total;
      r.iterations.push_back(row);
    }
  }
  if (!have_root && !trace.empty()) throw ReportError("trace has no root verdict");

  r.best_latency = r.start_latency;
  if (!r.iterations.empty()) {
    const auto& last = r.iterations.back();
    r.best_latency = last.best_latency;
    r.plan_calls = last.plan_calls;
    r.code_calls = last.code_calls;
    r.failed_calls = last.failed_calls;
    r.prompt_tokens = last.prompt_tokens;
    r.completion_tokens = last.completion_tokens;
  }
  r.speedup = r.best_latency > 0 ? static_cast<double>(r.start_latency) / static_cast<double>(r.best_latency) : 1.0;
  r.calls_reuse = calls_by_phase["reuse"];
  r.calls_refine = calls_by_phase["refine"];

  for (auto it = verdicts.find(best_id); it != verdicts.end() && it->second.parent;
       it = verdicts.find(*it->second.parent)) {
    r.schedule.push_back({it->second.menu_option, it->second.latency});
  }
  std::reverse(r.schedule.begin(), r.schedule.end());

  std::sort(gains.begin(), gains.end());
  for (const auto& [calls, lat] : gains) {
    if (lat >= best) continue;
    best = lat;
    if (!r.curve.empty() && r.curve.back().calls == calls) {
      r.curve.back().best_latency = lat;
    } else {
      r.curve.push_back({calls, lat});
    }
  }
  const std::int64_t total = r.plan_calls + r.code_calls;
  if (have_root && (r.curve.empty() || r.curve.back().calls < total)) r.curve.push_back({total, best});
  return r;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& i : r.iterations) {
    rows.push_back({{"iteration", i.iteration},
                    {"phase", i.phase},
                    {"best_latency", i.best_latency},
                    {"speedup", i.speedup},
                    {"plan_calls", i.plan_calls},
                    {"code_calls", i.code_calls},
                    {"failed_calls", i.failed_calls},
                    {"prompt_tokens", i.prompt_tokens},
                    {"completion_tokens", i.completion_tokens},
                    {"evaluated", i.evaluated},
                    {"correct", i.correct},
                    {"accepted", i.accepted},
                    {"beam_size", i.beam_size}});
  }
  nlohmann::json sched = nlohmann::json::array();
  for (const auto& s : r.schedule) sched.push_back({{"menu_option", s.menu_option}, {"latency_after", s.latency_after}});
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& c : r.curve) curve.push_back({{"calls", c.calls}, {"best_latency", c.best_latency}});
  return {{"start_latency", r.start_latency},
          {"best_latency", r.best_latency},
          {"speedup", r.speedup},
          {"iterations", rows},
          {"calls",
           {{"plan", r.plan_calls},
            {"code", r.code_calls},
            {"total", r.plan_calls + r.code_calls},
            {"failed", r.failed_calls},
            {"reuse", r.calls_reuse},
            {"refine", r.calls_refine}}},
          {"calls_reuse", r.calls_reuse},
          {"calls_refine", r.calls_refine},
          {"tokens", {{"prompt", r.prompt_tokens}, {"completion", r.completion_tokens}}},
          {"candidates", {{"evaluated", r.evaluated}, {"correct", r.correct}, {"accepted", r.accepted}}},
          {"schedule", sched},
          {"curve", curve}};
}

std::string to_csv(const Report& r) {
  std::string s =
      "iteration,phase,best_latency,speedup,plan_calls,code_calls,total_calls,failed_calls,"
      "prompt_tokens,completion_tokens,evaluated,correct,accepted,beam_size\n";
  for (const auto& i : r.iterations) {
    s += fmt::format("{},{},{},{:.4f},{},{},{},{},{},{},{},{},{},{}\n", i.iteration, i.phase, i.best_latency,
                     i.speedup, i.plan_calls, i.code_calls, i.plan_calls + i.code_calls, i.failed_calls,
                     i.prompt_tokens, i.completion_tokens, i.evaluated, i.correct, i.accepted, i.beam_size);
  }
  return s;
}

std::int64_t best_at(const std::vector<CurvePoint>& curve, std::int64_t budget, std::int64_t start_latency) {
  std::int64_t best = start_latency;
  for (const auto& p : curve) {
    if (p.calls > budget) break;
    best = std::min(best, p.best_latency);
  }
  return best;
}

IsoBudgetComparison compare_iso_budget(const Report& full, const Report& reuse) {
  IsoBudgetComparison c;
  c.start_latency = full.start_latency;
  c.full = full.curve;
  c.reuse = reuse.curve;
  c.max_budget = std::max(full.plan_calls + full.code_calls, reuse.plan_calls + reuse.code_calls);
  for (std::int64_t b = 1; b <= c.max_budget; ++b) {
    if (best_at(c.reuse, b, reuse.start_latency) > best_at(c.full, b, full.start_latency)) {
      c.first_shortfall = b;
      break;
    }
  }
  return c;
}

nlohmann::json to_json(const IsoBudgetComparison& c) {
  auto curve = [&](const std::vector<CurvePoint>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : pts) {
      a.push_back({{"calls", p.calls},
                   {"best_latency", p.best_latency},
                   {"speedup", static_cast<double>(c.start_latency) / static_cast<double>(p.best_latency)}});
    }
    return a;
  };
  return {{"start_latency", c.start_latency},
          {"max_budget", c.max_budget},
          {"full", curve(c.full)},
          {"reuse", curve(c.reuse)},
          {"reuse_dominates", c.reuse_dominates()},
          {"first_shortfall", c.first_shortfall}};
}

std::string to_csv(const IsoBudgetComparison& c) {
  std::string s = "calls,full_speedup,reuse_speedup\n";
  std::vector<std::int64_t> budgets;
  for (const auto& p : c.full) budgets.push_back(p.calls);
  for (const auto& p : c.reuse) budgets.push_back(p.calls);
  budgets.push_back(c.max_budget);
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  for (auto b : budgets) {
    if (b < 1) continue;
    auto sp = [&](const std::vector<CurvePoint>& pts) {
      return static_cast<double>(c.start_latency) / static_cast<double>(best_at(pts, b, c.start_latency));
    };
    s += fmt::format("{},{:.4f},{:.4f}\n", b, sp(c.full), sp(c.reuse));
  }
  return s;
}

}  // namespace tensopt::search
