#include "tensopt/search/search.hpp"

#include <algorithm>
#include <atomic>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "tensopt/core/files.hpp"
#include "tensopt/dsl/extract.hpp"
#include "tensopt/sim/perf.hpp"

namespace tensopt::search {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-sample stream: depends only on (seed, iteration, member, sample).
std::uint64_t sample_seed(std::uint64_t seed, int iteration, int member, int sample) {
  std::uint64_t h = splitmix64(seed);
  for (int v : {iteration, member, sample}) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string feedback_of(const Candidate& c, const sim::AcceleratorConfig& cfg) {
  return c.verdict.perf ? sim::compute_feedback(*c.verdict.perf, cfg) : std::string{};
}

nlohmann::json completion_payload(const llm::Completion& c, const std::string& phase) {
  nlohmann::json j{{"phase", phase},
                   {"ok", c.ok},
                   {"attempts", c.attempts},
                   {"prompt_tokens", c.prompt_tokens},
                   {"completion_tokens", c.completion_tokens}};
  if (c.ok) {
    j["text"] = c.text;
  } else {
    j["error"] = c.error;
  }
  return j;
}

}  // namespace

double SearchResult::speedup() const {
  return static_cast<double>(root().latency()) / static_cast<double>(best().latency());
}

nlohmann::json to_json(const Schedule& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : s.steps) {
    steps.push_back({{"menu_option", st.menu_option},
                     {"plan_text", st.plan_text},
                     {"latency_before", st.latency_before},
                     {"latency_after", st.latency_after}});
  }
  return {{"fingerprint", s.fingerprint}, {"steps", steps}};
}

Schedule schedule_from_json(const nlohmann::json& j) {
  Schedule s;
  s.fingerprint = j.at("fingerprint").get<std::string>();
  for (const auto& st : j.at("steps")) {
    s.steps.push_back({st.at("menu_option").get<std::string>(), st.value("plan_text", std::string{}),
                       st.at("latency_before").get<std::int64_t>(),
                       st.at("latency_after").get<std::int64_t>()});
  }
  return s;
}

SearchSession::SearchSession(const std::string& start_code, SearchConfig sc, Backends backends,
                             std::shared_ptr<const Evaluator> evaluator)
    : sc_(std::move(sc)), backends_(std::move(backends)), eval_(std::move(evaluator)) {
  if (auto problem = sc_.validate(); !problem.empty()) throw SearchError(SearchError::Kind::BadConfig, problem);
  if (!eval_) throw SearchError(SearchError::Kind::BadConfig, "no evaluator");
  if (backends_.empty() || std::any_of(backends_.begin(), backends_.end(), [](auto& b) { return !b; })) {
    throw SearchError(SearchError::Kind::NoBackends, "no usable backends");
  }
  Evaluation ev = eval_->evaluate(start_code);
  if (!ev.verdict.correct || !ev.verdict.latency_cycles) {
    std::string why = ev.verdict.first_mismatch ? ev.verdict.first_mismatch->reason : "";
    if (why.empty() && ev.verdict.first_mismatch) {
      const auto& m = *ev.verdict.first_mismatch;
      why = fmt::format("output '{}' differs at index {}", m.param, m.index);
    }
    throw SearchError(SearchError::Kind::StartIncorrect, "start kernel fails verification: " + why);
  }
  Candidate root;
  root.code_text = ev.code_text;
  root.code_hash = ev.code_hash;
  root.ast = ev.ast;
  root.verdict = ev.verdict;
  root.accepted = true;
  result_.candidates.push_back(std::move(root));
  result_.beam = BeamState{0, {0}, 0};
  record("verdict", {{"candidate", 0}},
         {{"phase", "root"},
          {"call_index", 0},
          {"correct", true},
          {"accepted", true},
          {"latency", result_.candidates[0].latency()},
          {"code_hash", hex64(result_.candidates[0].code_hash)},
          {"verdict", verify::to_json(ev.verdict)}});
}

void SearchSession::record(const std::string& kind, const nlohmann::json& ids, nlohmann::json payload) {
  result_.trace.push_back(
      {{"kind", kind}, {"iteration", iteration_}, {"ids", ids}, {"payload", std::move(payload)}});
}

std::vector<llm::Completion> SearchSession::dispatch(const std::vector<std::pair<int, llm::Request>>& reqs) {
  std::vector<llm::Completion> out(reqs.size());
  bool concurrent = std::all_of(reqs.begin(), reqs.end(),
                                [&](const auto& r) { return backends_[static_cast<std::size_t>(r.first)]->concurrent(); });
  // HTTP backends cap their own in-flight requests; scripted ones must see a fixed order.
  int threads = concurrent ? std::max(sc_.jobs, 8) : 1;
  parallel_for(reqs.size(), threads, [&](std::size_t i) {
    try {
      out[i] = backends_[static_cast<std::size_t>(reqs[i].first)]->complete(reqs[i].second);
    } catch (const std::exception& e) {
      out[i].ok = false;
      out[i].error = std::string("backend exception: ") + e.what();
    }
  });
  return out;
}

const BeamState& SearchSession::run_iteration(const IterationParams& p) {
  if (p.B < 1 || p.N < 1 || p.K < 1) throw SearchError(SearchError::Kind::BadConfig, "B, N and K must be at least 1");
  ++iteration_;
  const int it = iteration_;
  const auto& cfg = eval_->config();
  const int n_models = sc_.ablations.enable_ensemble ? static_cast<int>(backends_.size()) : 1;
  const std::vector<int> members = result_.beam.members;
  auto& calls = result_.calls;
  auto count_call = [&](const llm::Completion& c) {
    calls.prompt_tokens += c.prompt_tokens;
    calls.completion_tokens += c.completion_tokens;
    if (!c.ok) ++calls.failed_calls;
  };

  // Phase 1: N plans per member.
  struct PlanSlot {
    int member_pos, member_id, sample, model;
    std::optional<Plan> plan;
  };
  std::vector<PlanSlot> plan_slots;
  std::vector<std::pair<int, llm::Request>> plan_reqs;
  const auto plan_models = llm::ensemble_assign(p.N, n_models);
  for (std::size_t pos = 0; pos < members.size(); ++pos) {
    const Candidate& cur = candidate(members[pos]);
    PromptSubject subj{cur.code_text, feedback_of(cur, cfg)};
    for (int n = 0; n < p.N; ++n) {
      std::mt19937_64 rng(sample_seed(sc_.seed, it, static_cast<int>(pos), n));
      plan_slots.push_back({static_cast<int>(pos), cur.id, n, plan_models[n], std::nullopt});
      plan_reqs.push_back({plan_models[n], {llm::Phase::Plan, build_plan_prompt(subj, sc_, cfg, rng, p.reuse)}});
    }
  }
  auto plan_out = dispatch(plan_reqs);
  for (std::size_t i = 0; i < plan_slots.size(); ++i) {
    auto& s = plan_slots[i];
    ++calls.plan_calls;
    count_call(plan_out[i]);
    nlohmann::json ids{{"member", s.member_id}, {"sample", s.sample}, {"model", backends_[s.model]->label()}};
    record("plan_request", ids, {{"phase", p.phase}, {"prompt", plan_reqs[i].second.prompt}});
    auto payload = completion_payload(plan_out[i], p.phase);
    if (plan_out[i].ok) {
      s.plan = parse_plan(plan_out[i].text, sc_.menu);
      payload["menu_option"] = s.plan->menu_option;
    }
    record("plan_response", ids, std::move(payload));
  }

  // Phase 2: K codes per successful plan.
  struct CodeSlot {
    std::size_t plan_slot;
    int sample, model;
  };
  std::vector<CodeSlot> code_slots;
  std::vector<std::pair<int, llm::Request>> code_reqs;
  const auto code_models = llm::ensemble_assign(p.K, n_models);
  for (std::size_t i = 0; i < plan_slots.size(); ++i) {
    const auto& s = plan_slots[i];
    if (!s.plan) continue;
    const Candidate& cur = candidate(s.member_id);
    std::string prompt = build_code_prompt({cur.code_text, feedback_of(cur, cfg)}, *s.plan, sc_, cfg);
    for (int k = 0; k < p.K; ++k) {
      code_slots.push_back({i, k, code_models[k]});
      code_reqs.push_back({code_models[k], {llm::Phase::Code, prompt}});
    }
  }
  auto code_out = dispatch(code_reqs);

  struct Pending {
    std::size_t code_slot;
    std::int64_t call_index;
    std::optional<std::string> source;
  };
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < code_slots.size(); ++i) {
    const auto& c = code_slots[i];
    const auto& ps = plan_slots[c.plan_slot];
    ++calls.code_calls;
    count_call(code_out[i]);
    nlohmann::json ids{{"member", ps.member_id},
                       {"plan_sample", ps.sample},
                       {"sample", c.sample},
                       {"model", backends_[c.model]->label()}};
    record("code_request", ids, {{"phase", p.phase}, {"prompt", code_reqs[i].second.prompt}});
    record("code_response", ids, completion_payload(code_out[i], p.phase));
    if (code_out[i].ok) pending.push_back({i, calls.total(), dsl::extract_code_block(code_out[i].text)});
  }

  std::vector<Evaluation> evals(pending.size());
  parallel_for(pending.size(), sc_.jobs, [&](std::size_t i) {
    if (pending[i].source) evals[i] = eval_->evaluate(*pending[i].source);
  });

  std::vector<int> children;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& c = code_slots[pending[i].code_slot];
    const auto& ps = plan_slots[c.plan_slot];
    const Candidate& parent = candidate(ps.member_id);
    Candidate cand;
    cand.id = static_cast<int>(result_.candidates.size());
    cand.discovery_index = cand.id;
    cand.parent_id = parent.id;
    cand.plan = ps.plan;
    cand.iteration_found = it;
    cand.call_index = pending[i].call_index;
    if (!pending[i].source) {
      cand.code_text = code_out[pending[i].code_slot].text;
      cand.code_hash = fnv1a(cand.code_text);
      verify::Mismatch m;
      m.reason = "no code block in the response";
      cand.verdict.first_mismatch = m;
    } else {
      auto& ev = evals[i];
      cand.code_text = std::move(ev.code_text);
      cand.code_hash = ev.code_hash;
      cand.ast = std::move(ev.ast);
      cand.verdict = std::move(ev.verdict);
    }
    cand.accepted = cand.verdict.correct && cand.verdict.latency_cycles && cand.latency() < parent.latency();
    nlohmann::json payload{{"phase", p.phase},
                           {"call_index", cand.call_index},
                           {"correct", cand.verdict.correct},
                           {"accepted", cand.accepted},
                           {"menu_option", cand.plan->menu_option},
                           {"parent_latency", parent.latency()},
                           {"code_hash", hex64(cand.code_hash)},
                           {"verdict", verify::to_json(cand.verdict)}};
    if (cand.verdict.latency_cycles) payload["latency"] = *cand.verdict.latency_cycles;
    record("verdict",
           {{"candidate", cand.id}, {"parent", parent.id}, {"plan_sample", ps.sample}, {"sample", c.sample}},
           std::move(payload));
    if (cand.accepted) children.push_back(cand.id);
    result_.candidates.push_back(std::move(cand));
  }

  // Selection: parents stay in the pool; ties go to the earlier discovery.
  std::vector<int> pool = members;
  pool.insert(pool.end(), children.begin(), children.end());
  std::sort(pool.begin(), pool.end(), [&](int a, int b) {
    const auto& x = candidate(a);
    const auto& y = candidate(b);
    return std::pair(x.latency(), x.discovery_index) < std::pair(y.latency(), y.discovery_index);
  });
  std::set<std::uint64_t> seen;
  std::vector<int> next;
  for (int id : pool) {
    if (static_cast<int>(next.size()) == p.B) break;
    if (seen.insert(candidate(id).code_hash).second) next.push_back(id);
  }
  auto& beam = result_.beam;
  beam.iteration = it;
  beam.members = next;
  const Candidate& lead = candidate(next.front());
  const Candidate& best = candidate(beam.best_overall);
  if (std::pair(lead.latency(), lead.discovery_index) < std::pair(best.latency(), best.discovery_index)) {
    beam.best_overall = lead.id;
  }

  nlohmann::json snapshot = nlohmann::json::array();
  for (int id : next) {
    const auto& c = candidate(id);
    nlohmann::json m{{"id", id}, {"latency", c.latency()}, {"code_hash", hex64(c.code_hash)}};
    if (c.parent_id) m["parent"] = *c.parent_id;
    snapshot.push_back(std::move(m));
  }
  int evaluated = static_cast<int>(pending.size());
  int correct = 0;
  for (std::size_t i = result_.candidates.size() - pending.size(); i < result_.candidates.size(); ++i) {
    correct += result_.candidates[i].verdict.correct ? 1 : 0;
  }
  record("beam", nlohmann::json::object(),
         {{"phase", p.phase},
          {"B", p.B},
          {"N", p.N},
          {"K", p.K},
          {"members", snapshot},
          {"best", {{"id", beam.best_overall}, {"latency", candidate(beam.best_overall).latency()}}},
          {"start_latency", result_.root().latency()},
          {"calls", {{"plan", calls.plan_calls}, {"code", calls.code_calls}, {"failed", calls.failed_calls}}},
          {"tokens", {{"prompt", calls.prompt_tokens}, {"completion", calls.completion_tokens}}},
          {"candidates", {{"evaluated", evaluated}, {"correct", correct}, {"accepted", static_cast<int>(children.size())}}}});
  return beam;
}

void SearchSession::collapse_to_best() { result_.beam.members = {result_.beam.best_overall}; }

SearchResult SearchSession::finish() {
  result_.schedule = record_schedule(result_, eval_->spec().fingerprint());
  return std::move(result_);
}

SearchResult run_search(const std::string& start_code, const SearchConfig& sc, const Backends& backends,
                        std::shared_ptr<const Evaluator> evaluator) {
  SearchSession s(start_code, sc, backends, std::move(evaluator));
  for (int t = 0; t < sc.T; ++t) s.run_iteration({sc.B, sc.N, sc.K, std::nullopt, "search"});
  return s.finish();
}

SearchResult run_reuse_search(const std::string& start_code, const Schedule& recorded,
                              const ReuseParams& reuse, int refine_iters, const SearchConfig& sc,
                              const Backends& backends, std::shared_ptr<const Evaluator> evaluator) {
  if (recorded.steps.empty()) throw SearchError(SearchError::Kind::BadConfig, "recorded schedule is empty");
  if (refine_iters < 0) throw SearchError(SearchError::Kind::BadConfig, "refine iterations must be >= 0");
  SearchSession s(start_code, sc, backends, std::move(evaluator));
  for (const auto& step : recorded.steps) {
    s.run_iteration({reuse.B, reuse.N, reuse.K, ReuseConstraint{step.menu_option, step.plan_text}, "reuse"});
  }
  const std::int64_t reuse_calls = s.result().calls.total();
  if (refine_iters > 0) s.collapse_to_best();
  for (int r = 0; r < refine_iters; ++r) s.run_iteration({sc.B, sc.N, sc.K, std::nullopt, "refine"});
  SearchResult out = s.finish();
  out.calls_reuse = reuse_calls;
  out.calls_refine = out.calls.total() - reuse_calls;
  return out;
}

Schedule record_schedule(const SearchResult& r, const std::string& fingerprint) {
  Schedule s;
  s.fingerprint = fingerprint;
  if (r.candidates.empty()) return s;
  for (const Candidate* c = &r.best(); c->parent_id; c = &r.candidates.at(static_cast<std::size_t>(*c->parent_id))) {
    const Candidate& parent = r.candidates.at(static_cast<std::size_t>(*c->parent_id));
    s.steps.push_back({c->plan ? c->plan->menu_option : std::string(kOtherOption),
                       c->plan ? c->plan->plan_text : std::string{}, parent.latency(), c->latency()});
  }
  std::reverse(s.steps.begin(), s.steps.end());
  return s;
}

std::optional<std::string> reuse_similarity_warning(const std::string& recorded_fp,
                                                    const std::string& target_fp) {
  auto split = [](const std::string& fp) {
    auto first = fp.find(':'), last = fp.rfind(':');
    std::string kind = fp.substr(0, first);
    std::string type = last == std::string::npos ? "" : fp.substr(last + 1);
    std::string mid = first == last ? "" : fp.substr(first + 1, last - first - 1);
    std::vector<long long> dims;
    static const std::regex num(R"(\d+)");
    for (std::sregex_iterator i(mid.begin(), mid.end(), num), e; i != e; ++i) dims.push_back(std::stoll(i->str()));
    return std::tuple(kind, type, dims);
  };
  auto [ka, ta, da] = split(recorded_fp);
  auto [kb, tb, db] = split(target_fp);
  if (ka != kb) return fmt::format("schedule was recorded on a {} workload, target is {}", ka, kb);
  if (ta != tb) return fmt::format("schedule was recorded for {} data, target is {}", ta, tb);
  std::size_t shared = 0;
  for (std::size_t i = 0; i < std::min(da.size(), db.size()); ++i) shared += da[i] == db[i] ? 1 : 0;
  std::size_t need = std::min<std::size_t>(2, std::max(da.size(), db.size()));
  if (da.size() != db.size() || shared < need) {
    return fmt::format("schedule fingerprint {} shares {} dimension(s) with {}", recorded_fp, shared, target_fp);
  }
  return std::nullopt;
}

}  // namespace tensopt::search
