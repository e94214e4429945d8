#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tensopt/llm/backend.hpp"
#include "tensopt/search/config.hpp"
#include "tensopt/search/evaluator.hpp"
#include "tensopt/search/plan.hpp"
#include "tensopt/search/prompts.hpp"

namespace tensopt::search {

using Backends = std::vector<std::shared_ptr<llm::Backend>>;

struct Candidate {
  int id = 0;  // equals the discovery index; the root is 0
  std::string code_text;
  std::uint64_t code_hash = 0;
  std::shared_ptr<const dsl::KernelProgram> ast;
  std::optional<int> parent_id;
  std::optional<Plan> plan;
  verify::Verdict verdict;
  int iteration_found = 0;
  int discovery_index = 0;
  std::int64_t call_index = 0;  // running LLM call count when its code arrived
  bool accepted = false;        // correct and faster than its parent

  std::int64_t latency() const { return verdict.latency_cycles.value_or(INT64_MAX); }
};

struct BeamState {
  int iteration = 0;
  std::vector<int> members;  // candidate ids, sorted by (latency, discovery_index)
  int best_overall = 0;
};

struct ScheduleStep {
  std::string menu_option;
  std::string plan_text;
  std::int64_t latency_before = 0;
  std::int64_t latency_after = 0;

  bool operator==(const ScheduleStep&) const = default;
};

struct Schedule {
  std::string fingerprint;
  std::vector<ScheduleStep> steps;

  bool operator==(const Schedule&) const = default;
};

nlohmann::json to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

struct CallStats {
  std::int64_t plan_calls = 0;
  std::int64_t code_calls = 0;
  std::int64_t failed_calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return plan_calls + code_calls; }
};

struct SearchResult {
  std::vector<Candidate> candidates;  // indexed by id
  BeamState beam;
  Schedule schedule;
  std::vector<nlohmann::json> trace;
  CallStats calls;
  std::int64_t calls_reuse = 0;
  std::int64_t calls_refine = 0;

  const Candidate& root() const { return candidates.front(); }
  const Candidate& best() const { return candidates.at(static_cast<std::size_t>(beam.best_overall)); }
  double speedup() const;
};

class SearchError : public std::runtime_error {
 public:
  enum class Kind { BadConfig, StartIncorrect, NoBackends };
  SearchError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

/// Shape of one iteration: B, N, K and an optional reuse constraint.
struct IterationParams {
  int B = 6, N = 6, K = 2;
  std::optional<ReuseConstraint> reuse;
  std::string phase = "search";  // trace label: search, reuse or refine
};

/// A search in progress. The constructor verifies the start kernel.
class SearchSession {
 public:
  SearchSession(const std::string& start_code, SearchConfig sc, Backends backends,
                std::shared_ptr<const Evaluator> evaluator);

  /// One plan -> code round over every beam member, then selection.
  const BeamState& run_iteration(const IterationParams& p);
  /// Replaces the beam with its best member only.
  void collapse_to_best();

  const BeamState& beam() const { return result_.beam; }
  const Candidate& candidate(int id) const { return result_.candidates.at(static_cast<std::size_t>(id)); }
  const SearchResult& result() const { return result_; }
  /// Finalizes the schedule and hands over the result.
  SearchResult finish();

 private:
  void record(const std::string& kind, const nlohmann::json& ids, nlohmann::json payload);
  std::vector<llm::Completion> dispatch(const std::vector<std::pair<int, llm::Request>>& reqs);

  SearchConfig sc_;
  Backends backends_;
  std::shared_ptr<const Evaluator> eval_;
  SearchResult result_;
  int iteration_ = 0;
};

SearchResult run_search(const std::string& start_code, const SearchConfig& sc, const Backends& backends,
                        std::shared_ptr<const Evaluator> evaluator);

struct ReuseParams {
  int B = 2, N = 2, K = 2;
};

/// One constrained iteration per recorded step, then `refine_iters` full-menu
/// iterations at the search config's B, N, K starting from the best kernel.
SearchResult run_reuse_search(const std::string& start_code, const Schedule& recorded,
                              const ReuseParams& reuse, int refine_iters, const SearchConfig& sc,
                              const Backends& backends, std::shared_ptr<const Evaluator> evaluator);

/// Steps along the ancestry of the best candidate, root first.
Schedule record_schedule(const SearchResult& r, const std::string& fingerprint);

/// Warning text when two workload fingerprints look too different for reuse
/// (different kinds or fewer than two shared dimensions).
std::optional<std::string> reuse_similarity_warning(const std::string& recorded_fp,
                                                    const std::string& target_fp);

}  // namespace tensopt::search
