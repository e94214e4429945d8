#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tensopt::search {

struct IterationRow {
  int iteration = 0;
  std::string phase;
  std::int64_t best_latency = 0;
  double speedup = 1.0;
  std::int64_t plan_calls = 0;  // cumulative
  std::int64_t code_calls = 0;  // cumulative
  std::int64_t failed_calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  int evaluated = 0;  // this iteration
  int correct = 0;
  int accepted = 0;
  int beam_size = 0;
};

/// Best latency reached once `calls` LLM calls had been made.
struct CurvePoint {
  std::int64_t calls = 0;
  std::int64_t best_latency = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct ScheduleSummary {
  std::string menu_option;
  std::int64_t latency_after = 0;
};

struct Report {
  std::int64_t start_latency = 0;
  std::int64_t best_latency = 0;
  double speedup = 1.0;
  std::vector<IterationRow> iterations;
  std::int64_t plan_calls = 0, code_calls = 0, failed_calls = 0;
  std::int64_t prompt_tokens = 0, completion_tokens = 0;
  std::int64_t calls_reuse = 0, calls_refine = 0;
  int evaluated = 0, correct = 0, accepted = 0;
  std::vector<ScheduleSummary> schedule;
  std::vector<CurvePoint> curve;
};

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rebuilds the run summary from trace records alone. Throws ReportError on
/// records that do not fit the trace format.
Report build_report(const std::vector<nlohmann::json>& trace);
/// Parses JSON lines; blank lines are skipped.
std::vector<nlohmann::json> parse_trace(const std::string& jsonl);
std::string format_trace(const std::vector<nlohmann::json>& trace);

nlohmann::json to_json(const Report& r);
/// One row per iteration; header only when there are none.
std::string to_csv(const Report& r);

/// Best latency available at `budget` calls (the start latency before any gain).
std::int64_t best_at(const std::vector<CurvePoint>& curve, std::int64_t budget, std::int64_t start_latency);

struct IsoBudgetComparison {
  std::int64_t start_latency = 0;
  std::vector<CurvePoint> full, reuse;
  std::int64_t max_budget = 0;
  /// Smallest budget where reuse trails full search, or -1 when it never does.
  std::int64_t first_shortfall = -1;
  bool reuse_dominates() const { return first_shortfall < 0; }
};

/// Compares two runs from the same start kernel at every call budget from 1 to
/// the larger of the two call totals.
IsoBudgetComparison compare_iso_budget(const Report& full, const Report& reuse);
nlohmann::json to_json(const IsoBudgetComparison& c);
std::string to_csv(const IsoBudgetComparison& c);

}  // namespace tensopt::search
