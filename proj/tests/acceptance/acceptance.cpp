// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.
// Usage: acceptance [--cli <path to tensopt>] [criterion numbers...]
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tensopt/bench/gemm.hpp"
#include "tensopt/bench/schedule.hpp"
#include "tensopt/core/files.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/dsl/printer.hpp"
#include "tensopt/dsl/validate.hpp"
#include "tensopt/llm/backend.hpp"
#include "tensopt/search/report.hpp"
#include "tensopt/search/search.hpp"
#include "tensopt/sim/simulator.hpp"
#include "tensopt/verify/equivalence.hpp"
#include "tensopt/verify/oracles.hpp"

using namespace tensopt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

// Pinned tolerances and thresholds.
constexpr double kFloatRel = 1e-5;
constexpr double kFloatAbs = 1e-6;
constexpr double kOracleSeconds = 120.0;
constexpr double kReplaySeconds = 300.0;
constexpr double kReplaySpeedup = 3.0;
constexpr double kRetention = 0.30;
constexpr double kRetentionTol = 0.02;
constexpr int kRenders = 10000;
constexpr int kMockSearches = 1000;
constexpr int kTimedRuns = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

dsl::KernelProgram parse_or_throw(const std::string& src) {
  auto r = dsl::parse_kernel(src);
  if (!r) throw std::runtime_error("parse failed: " + dsl::format(r.diagnostics));
  return *r.program;
}

sim::Program compile_or_throw(const std::string& src, const sim::AcceleratorConfig& cfg,
                              const dsl::Bindings& b = {}) {
  auto c = sim::Program::compile(parse_or_throw(src), cfg, b);
  if (!c.program) throw std::runtime_error("compile failed: " + dsl::format(c.diagnostics));
  return *c.program;
}

std::string canonical(const std::string& src) { return dsl::print_kernel(parse_or_throw(src)); }

// ---------------------------------------------------------------------------
// 1. Oracle equivalence

// Independent int8 GEMM: exact integer sum, clamp to int8.
std::vector<std::int64_t> naive_gemm(const Tensor& A, const Tensor& B) {
  const auto M = A.shape[0], K = A.shape[1], N = B.shape[1];
  std::vector<std::int64_t> C(M * N);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      std::int64_t s = 0;
      for (std::size_t k = 0; k < K; ++k) s += A.get_int(i * K + k) * B.get_int(k * N + j);
      C[i * N + j] = std::clamp<std::int64_t>(s, -128, 127);
    }
  }
  return C;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int gemm_ok = 0;
  std::string first_bad;
  for (int t = 0; t < 100; ++t) {
    const int M = 16 * static_cast<int>(1 + rng() % 4), K = 16 * static_cast<int>(1 + rng() % 4),
              N = 16 * static_cast<int>(1 + rng() % 4);
    auto spec = verify::gemm_spec(M, K, N);
    auto prog = compile_or_throw(bench::gemm_unopt(M, K, N), sim::instance_a(), spec.bindings());
    auto in = verify::random_inputs(spec, rng());
    auto run = prog.run(in);
    auto want = verify::reference_gemm(in.at("A"), in.at("B"));
    auto naive = naive_gemm(in.at("A"), in.at("B"));
    bool ok = run.ok && run.arrays.at("C") == want;
    for (std::size_t i = 0; ok && i < naive.size(); ++i) ok = want.get_int(i) == naive[i];
    if (ok) {
      ++gemm_ok;
    } else if (first_bad.empty()) {
      first_bad = fmt::format(" first failure {}x{}x{}", M, K, N);
    }
  }

  auto spec = verify::tinympc_spec(5);
  auto prog = compile_or_throw(read_asset("kernels/tinympc_fwd_unopt.gk"), sim::instance_b(), spec.bindings());
  int mpc_ok = 0;
  double worst_rel = 0.0;
  for (int t = 0; t < 50; ++t) {
    auto in = verify::random_inputs(spec, 5000 + static_cast<std::uint64_t>(t));
    auto run = prog.run(in);
    auto want = verify::reference_outputs(spec, in);
    bool ok = run.ok;
    for (const auto& ps : verify::param_specs(spec)) {
      if (!ok || ps.role == verify::Role::Input) continue;
      const Tensor& e = want.at(ps.name);
      const Tensor& a = run.arrays.at(ps.name);
      const std::size_t row = e.size() / e.shape[0];
      const std::size_t end = ps.compare_end ? ps.compare_end : e.shape[0];
      for (std::size_t i = ps.compare_begin * row; i < end * row; ++i) {
        const double diff = std::fabs(a.get(i) - e.get(i));
        if (diff > kFloatRel * std::fabs(e.get(i)) + kFloatAbs) ok = false;
        if (std::fabs(e.get(i)) > kFloatAbs) worst_rel = std::max(worst_rel, diff / std::fabs(e.get(i)));
      }
    }
    mpc_ok += ok;
  }
  const double secs = seconds_since(t0);
  return {gemm_ok == 100 && mpc_ok == 50 && secs < kOracleSeconds,
          fmt::format("int8 GEMM {}/100 exact{}; TinyMPC {}/50 within {:g} rel + {:g} abs (worst rel {:.2e}); "
                      "{:.1f}s (limit {:.0f}s)",
                      gemm_ok, first_bad, mpc_ok, kFloatRel, kFloatAbs, worst_rel, secs, kOracleSeconds)};
}

// ---------------------------------------------------------------------------
// 2. Corpus parity

Outcome criterion2() {
  struct Case {
    std::string file;
    verify::WorkloadSpec spec;
    sim::AcceleratorConfig cfg;
  };
  const auto big = verify::gemm_spec(12544, 256, 64);
  std::vector<Case> cases{
      {"gemm_12544x64x256_unopt.gk", big, sim::instance_a()},
      {"gemm_12544x64x256_exo_opt.gk", big, sim::instance_a()},
      {"gemm_12544x64x256_autocomp.gk", big, sim::instance_a()},
      {"tinympc_fwd_unopt.gk", verify::tinympc_spec(5), sim::instance_b()},
      {"tinympc_fwd_autocomp.gk", verify::tinympc_spec(5), sim::instance_b()},
      {"conv_b1_c16x16_s9_k3_unopt.gk", verify::conv_spec({}), sim::instance_a()},
      {"gemm_64x64x64_unopt.gk", verify::gemm_spec(64, 64, 64), sim::instance_a()},
      {"gemm_512x512x512_unopt.gk", verify::gemm_spec(512, 512, 512), sim::instance_a()},
  };
  verify::CheckOptions opts;
  opts.n_functional = 2;
  opts.n_timed = 1;
  std::map<std::string, std::int64_t> lat;
  std::vector<std::string> bad;
  for (const auto& c : cases) {
    auto parsed = dsl::parse_kernel(read_asset("kernels/" + c.file));
    if (!parsed) {
      bad.push_back(c.file + " (parse)");
      continue;
    }
    auto diags = dsl::validate_kernel(*parsed.program, c.cfg, c.spec.bindings());
    if (dsl::has_errors(diags)) {
      bad.push_back(c.file + " (validate)");
      continue;
    }
    auto v = verify::check_equivalence(*parsed.program, c.spec, c.cfg, opts);
    if (!v.correct) {
      bad.push_back(c.file + " (verify)");
      continue;
    }
    lat[c.file] = *v.latency_cycles;
  }
  // The hardware-FSM reference parses but is not an executable kernel.
  auto fsm = dsl::parse_kernel(read_asset("kernels/tinympc_fwd_hwfsm_ref.gk"));
  bool fsm_ok = fsm && dsl::has_errors(dsl::validate_kernel(*fsm.program, sim::instance_b(),
                                                            verify::tinympc_spec(5).bindings()));
  if (!fsm_ok) bad.push_back("tinympc_fwd_hwfsm_ref.gk (expected parse-only)");

  const auto un = lat["gemm_12544x64x256_unopt.gk"], exo = lat["gemm_12544x64x256_exo_opt.gk"],
             ac = lat["gemm_12544x64x256_autocomp.gk"];
  const bool order = bad.empty() && ac < un && exo < un;
  return {order, fmt::format("{} kernels verified{}; GEMM latency unopt {} > exo_opt {}, autocomp {}",
                             lat.size(), bad.empty() ? "" : ", problems: " + fmt::format("{}", fmt::join(bad, ", ")),
                             un, exo, ac)};
}

// ---------------------------------------------------------------------------
// 3. Scripted nine-step replay on 512^3

search::Schedule g_replay_schedule;  // shared with criterion 7 when both run

Outcome criterion3() {
  const auto t0 = Clock::now();
  auto sc = search::default_search_config();
  sc.B = sc.N = sc.K = 1;
  sc.T = 9;
  auto ev = std::make_shared<search::Evaluator>(verify::gemm_spec(512, 512, 512), sim::instance_a(), sc.check);
  search::Backends backends{std::make_shared<llm::ScriptedBackend>(bench::gemm_replay_manifest(512, 512, 512))};
  auto r = search::run_search(bench::gemm_unopt(512, 512, 512), sc, backends, ev);
  const double secs = seconds_since(t0);
  const auto& steps = r.schedule.steps;
  bool decreasing = steps.size() == 9;
  std::int64_t prev = r.root().latency();
  for (const auto& s : steps) {
    decreasing = decreasing && s.latency_before == prev && s.latency_after < s.latency_before;
    prev = s.latency_after;
  }
  const double speedup = static_cast<double>(r.root().latency()) / static_cast<double>(r.best().latency());
  g_replay_schedule = r.schedule;
  return {decreasing && speedup >= kReplaySpeedup && secs < kReplaySeconds,
          fmt::format("{} steps, strictly decreasing: {}; {} -> {} cycles = {:.3f}x (need >= {:.1f}x); "
                      "{:.0f}s (limit {:.0f}s)",
                      steps.size(), decreasing ? "yes" : "no", r.root().latency(), r.best().latency(), speedup,
                      kReplaySpeedup, secs, kReplaySeconds)};
}

// ---------------------------------------------------------------------------
// 4. Beam invariants over randomized mock searches, checked from the trace alone

// Returns the first violated invariant, or empty.
std::string check_beam_trace(const std::vector<json>& trace, int B, int N, int K, int T) {
  std::map<int, json> verdicts;
  std::int64_t plan_requests = 0, code_requests = 0;
  std::int64_t best = INT64_MAX;
  int beams = 0;
  json last_beam;
  for (const auto& rec : trace) {
    const std::string kind = rec.at("kind");
    const json& p = rec.at("payload");
    if (kind == "plan_request") ++plan_requests;
    if (kind == "code_request") ++code_requests;
    if (kind == "verdict") verdicts[rec.at("ids").at("candidate").get<int>()] = p;
    if (kind != "beam") continue;
    ++beams;
    last_beam = p;
    const auto& members = p.at("members");
    if (static_cast<int>(members.size()) > B) return fmt::format("beam of {} exceeds B={}", members.size(), B);
    for (const auto& m : members) {
      int id = m.at("id");
      if (!verdicts.count(id)) return fmt::format("member {} has no verdict", id);
      if (!verdicts[id].at("correct").get<bool>()) return fmt::format("member {} is incorrect", id);
      // Walk to the root; every step must strictly improve.
      int cur = id;
      for (int guard = 0; guard < 10000; ++guard) {
        const json& v = verdicts.at(cur);
        std::int64_t lat = v.at("latency");
        auto rec_it = std::find_if(trace.begin(), trace.end(), [&](const json& t) {
          return t.at("kind") == "verdict" && t.at("ids").at("candidate") == cur;
        });
        const json& ids = rec_it->at("ids");
        if (!ids.contains("parent")) break;
        int parent = ids.at("parent");
        const json& pv = verdicts.at(parent);
        if (!pv.contains("latency") || lat >= pv.at("latency").get<std::int64_t>()) {
          return fmt::format("ancestry of {} not strictly decreasing at {} -> {}", id, parent, cur);
        }
        cur = parent;
      }
    }
    std::int64_t b = p.at("best").at("latency");
    if (b > best) return fmt::format("best-overall rose from {} to {}", best, b);
    best = b;
  }
  if (beams != T) return fmt::format("{} beam records for T={}", beams, T);
  const std::int64_t tbn = static_cast<std::int64_t>(T) * B * N;
  if (plan_requests > tbn) return fmt::format("{} plan calls > T*B*N = {}", plan_requests, tbn);
  if (code_requests > tbn * K) return fmt::format("{} code calls > T*B*N*K = {}", code_requests, tbn * K);
  if (beams && (last_beam.at("calls").at("plan") != plan_requests || last_beam.at("calls").at("code") != code_requests)) {
    return "beam call counters disagree with the request records";
  }
  return {};
}

// Stage 1 with `n` harmless extra statements: a distinct, still-faster kernel.
std::string padded(const std::string& kernel, int n) {
  std::string pad;
  for (int i = 0; i < n; ++i) pad += fmt::format("  int pad{} = {};\n", i, i);
  auto at = kernel.find("{\n") + 2;
  return kernel.substr(0, at) + pad + kernel.substr(at);
}

Outcome criterion4() {
  const int S = bench::gemm_stage_count();
  std::vector<std::string> stage(static_cast<std::size_t>(S)), stage_code(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    stage[s] = bench::gemm_stage(64, 64, 64, s);
    stage_code[s] = canonical(stage[s]);
  }
  std::string broken = stage[1];
  broken.replace(broken.find("mvout("), 6, "mvin(");
  std::vector<std::string> pool;  // code responses
  for (int s = 0; s < S; ++s) pool.push_back("```c\n" + stage[s] + "```");
  for (int n = 1; n <= 3; ++n) pool.push_back("```c\n" + padded(stage[1], n) + "```");
  pool.push_back("```c\n" + broken + "```");
  pool.push_back("```c\nvoid test( {\n```");
  pool.push_back("I would rather not.");

  verify::CheckOptions quick;
  quick.n_functional = 1;
  quick.n_timed = 1;
  auto ev = std::make_shared<search::Evaluator>(verify::gemm_spec(64, 64, 64), sim::instance_a(), quick);
  const auto menu = search::gemm_menu();
  std::mt19937_64 rng(4);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  int ok = 0;
  std::string first;
  std::int64_t calls = 0;
  for (int i = 0; i < kMockSearches; ++i) {
    auto sc = search::default_search_config();
    sc.check = quick;
    sc.B = pick(1, 4), sc.N = pick(1, 3), sc.K = pick(1, 2), sc.T = pick(0, 4);
    sc.seed = rng();
    llm::ScriptManifest m;
    for (int e = pick(1, 3); e > 0; --e) {
      const auto& opt = menu.options[rng() % menu.options.size()];
      m.entries.push_back({llm::Phase::Plan, {}, "OPTIMIZATION: " + opt + "\nDo it.", pick(0, 3)});
    }
    for (int e = pick(2, 8); e > 0; --e) {
      std::vector<std::string> match;
      if (rng() % 2) match.push_back(stage_code[rng() % S]);
      m.entries.push_back({llm::Phase::Code, match, pool[rng() % pool.size()], pick(0, 3)});
    }
    search::Backends backends{std::make_shared<llm::ScriptedBackend>(m)};
    auto r = search::run_search(stage[0], sc, backends, ev);
    calls += r.calls.total();
    auto problem = check_beam_trace(r.trace, sc.B, sc.N, sc.K, sc.T);
    if (problem.empty()) {
      ++ok;
    } else if (first.empty()) {
      first = fmt::format("; search {}: {}", i, problem);
    }
  }
  return {ok == kMockSearches,
          fmt::format("{}/{} traces satisfy every invariant ({} LLM calls, {} distinct kernels evaluated){}", ok,
                      kMockSearches, calls, ev->evaluations(), first)};
}

// ---------------------------------------------------------------------------
// 5. Menu dropout

Outcome criterion5() {
  const auto menu = search::gemm_menu();
  const std::string kept = menu.always_keep.front();
  std::mt19937_64 rng(5);
  std::map<std::string, int> seen;
  for (int i = 0; i < kRenders; ++i) {
    for (const auto& o : search::draw_menu(menu, 0.7, rng)) ++seen[o];
  }
  double lo = 1.0, hi = 0.0;
  bool in_band = true;
  for (const auto& o : menu.options) {
    if (o == kept) continue;
    const double r = static_cast<double>(seen[o]) / kRenders;
    lo = std::min(lo, r), hi = std::max(hi, r);
    in_band = in_band && std::fabs(r - kRetention) <= kRetentionTol;
  }
  const bool kept_always = seen[kept] == kRenders;
  bool p0 = true, p1 = true;
  for (int i = 0; i < 1000; ++i) {
    p0 = p0 && search::draw_menu(menu, 0.0, rng) == menu.options;
    auto d = search::draw_menu(menu, 1.0, rng);
    p1 = p1 && d.size() == 2 && d.back() == kept && d.front() != kept;
  }
  return {in_band && kept_always && p0 && p1,
          fmt::format("retention over {} renders in [{:.4f}, {:.4f}] (need {:.2f} +- {:.2f}); kept line always "
                      "present: {}; p=0 full menu: {}; p=1 kept line plus one: {}",
                      kRenders, lo, hi, kRetention, kRetentionTol, kept_always, p0, p1)};
}

// ---------------------------------------------------------------------------
// 6. Ensemble split

// Counts requests per phase; answers plans with a fixed option and codes with the start kernel.
class CountingBackend : public llm::Backend {
 public:
  CountingBackend(std::string label, std::string code) : label_(std::move(label)), code_(std::move(code)) {}
  llm::Completion complete(const llm::Request& r) override {
    llm::Completion c;
    c.ok = true;
    c.attempts = 1;
    if (r.phase == llm::Phase::Plan) {
      ++plans;
      c.text = "OPTIMIZATION: loop unrolling\nUnroll.";
    } else {
      ++codes;
      c.text = "```c\n" + code_ + "```";
    }
    return c;
  }
  std::string label() const override { return label_; }
  bool concurrent() const override { return false; }
  int plans = 0, codes = 0;

 private:
  std::string label_, code_;
};

Outcome criterion6() {
  int bad_fn = 0, bad_route = 0, combos = 0;
  std::string first;
  verify::CheckOptions quick;
  quick.n_functional = 1;
  quick.n_timed = 1;
  const std::string start = bench::gemm_unopt(16, 16, 16);
  auto ev = std::make_shared<search::Evaluator>(verify::gemm_spec(16, 16, 16), sim::instance_a(), quick);
  auto spread = [](const std::vector<int>& counts) {
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    return *hi - *lo;
  };
  for (int n = 1; n <= 100; ++n) {
    for (int k = 1; k <= 5; ++k) {
      ++combos;
      std::vector<int> counts(static_cast<std::size_t>(k));
      for (int m : llm::ensemble_assign(n, k)) ++counts.at(static_cast<std::size_t>(m));
      if (spread(counts) > 1) ++bad_fn;
      // Route real requests: N = n plan samples, then K = n code samples of one plan.
      std::vector<std::shared_ptr<CountingBackend>> models;
      search::Backends backends;
      for (int j = 0; j < k; ++j) {
        models.push_back(std::make_shared<CountingBackend>(fmt::format("m{}", j), start));
        backends.push_back(models.back());
      }
      auto sc = search::default_search_config();
      sc.check = quick;
      sc.B = 1, sc.N = n, sc.K = 1, sc.T = 1;
      search::run_search(start, sc, backends, ev);
      std::vector<int> plans;
      for (auto& b : models) plans.push_back(b->plans), b->codes = 0;
      sc.N = 1, sc.K = n;
      search::run_search(start, sc, backends, ev);
      std::vector<int> codes;
      for (auto& b : models) codes.push_back(b->codes);
      int plan_total = 0, code_total = 0;
      for (int j = 0; j < k; ++j) plan_total += plans[j], code_total += codes[j];
      if (spread(plans) > 1 || spread(codes) > 1 || plan_total != n || code_total != n) {
        ++bad_route;
        if (first.empty()) first = fmt::format("; first bad routing n={} k={}", n, k);
      }
    }
  }
  return {bad_fn == 0 && bad_route == 0,
          fmt::format("{} (n, k) pairs: assignment spread > 1 in {}, routed plan/code spread > 1 in {}{}", combos,
                      bad_fn, bad_route, first)};
}

// ---------------------------------------------------------------------------
// 7. Reuse accounting and the iso-budget harness

// Best latency within `budget` calls, from accepted verdict records.
std::int64_t best_within(const std::vector<json>& trace, std::int64_t budget) {
  std::int64_t best = INT64_MAX;
  for (const auto& t : trace) {
    if (t.at("kind") != "verdict") continue;
    const auto& p = t.at("payload");
    if (!p.at("accepted").get<bool>() || p.at("call_index").get<std::int64_t>() > budget) continue;
    best = std::min(best, p.at("latency").get<std::int64_t>());
  }
  return best;
}

std::int64_t total_calls(const std::vector<json>& trace) {
  std::int64_t n = 0;
  for (const auto& t : trace) n += t.at("kind") == "plan_request" || t.at("kind") == "code_request";
  return n;
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  // (a) one full-search iteration with a full beam at B=6, N=6, K=2
  verify::CheckOptions quick;
  quick.n_functional = 1;
  quick.n_timed = 1;
  const std::string s0 = bench::gemm_stage(64, 64, 64, 0), s1 = bench::gemm_stage(64, 64, 64, 1);
  llm::ScriptManifest fill;
  fill.entries.push_back({llm::Phase::Plan, {}, "OPTIMIZATION: loop unrolling\nUnroll.", 0});
  for (int v = 1; v <= 12; ++v) fill.entries.push_back({llm::Phase::Code, {}, "```c\n" + padded(s1, v) + "```", 1});
  fill.entries.push_back({llm::Phase::Code, {}, "```c\n" + s0 + "```", 0});
  auto sc = search::default_search_config();
  sc.check = quick;
  search::SearchSession session(
      s0, sc, {std::make_shared<llm::ScriptedBackend>(fill)},
      std::make_shared<search::Evaluator>(verify::gemm_spec(64, 64, 64), sim::instance_a(), quick));
  session.run_iteration({6, 6, 2, std::nullopt, "search"});
  const auto beam_before = session.beam().members.size();
  const auto calls_before = session.result().calls.total();
  session.run_iteration({6, 6, 2, std::nullopt, "search"});
  const auto full_iteration_calls = session.result().calls.total() - calls_before;

  // (b) scripted iso-budget harness on 512^3; both searches share one evaluator
  search::Schedule recorded = g_replay_schedule;
  if (recorded.steps.empty()) {
    recorded.fingerprint = "gemm:512x512x512:int8";
    for (const auto& s : bench::gemm_schedule_steps()) recorded.steps.push_back({s.menu_option, s.plan_text, 0, 0});
  }
  auto ev = std::make_shared<search::Evaluator>(verify::gemm_spec(512, 512, 512), sim::instance_a(), quick);
  auto full_sc = search::default_search_config();
  full_sc.check = quick;
  full_sc.T = 9;
  full_sc.seed = 3;
  const std::string start = bench::gemm_unopt(512, 512, 512);
  auto full = search::run_search(
      start, full_sc, {std::make_shared<llm::ScriptedBackend>(bench::gemm_oracle_manifest(512, 512, 512))}, ev);
  auto reuse = search::run_reuse_search(
      start, recorded, {2, 2, 2}, 0, full_sc,
      {std::make_shared<llm::ScriptedBackend>(bench::gemm_oracle_manifest(512, 512, 512))}, ev);

  const std::int64_t reuse_calls = total_calls(reuse.trace);
  const std::int64_t max_budget = std::max(total_calls(full.trace), reuse_calls);
  const std::int64_t start_lat = full.root().latency();
  std::int64_t shortfall = -1;
  for (std::int64_t b = 1; b <= max_budget && shortfall < 0; ++b) {
    const auto f = std::min(start_lat, best_within(full.trace, b));
    const auto r = std::min(start_lat, best_within(reuse.trace, b));
    if (r > f) shortfall = b;
  }
  auto cmp = search::compare_iso_budget(search::build_report(full.trace), search::build_report(reuse.trace));
  const bool routes_agree = cmp.first_shortfall == shortfall && cmp.max_budget == max_budget;
  const double secs = seconds_since(t0);
  const bool pass = beam_before == 6 && full_iteration_calls == 108 && reuse.calls_reuse <= 108 &&
                    reuse.calls_refine == 0 && reuse.calls_reuse == reuse_calls && shortfall < 0 && routes_agree;
  return {pass,
          fmt::format("full iteration with beam {}: {} calls; reuse over {} steps at B=N=K=2: {} calls (limit 108), "
                      "{:.3f}x; full search T=9: {} calls, {:.3f}x; reuse >= full at every budget 1..{}: {}; "
                      "module comparison agrees: {}; {:.0f}s",
                      beam_before, full_iteration_calls, recorded.steps.size(), reuse.calls_reuse, reuse.speedup(),
                      full.calls.total(), full.speedup(), max_budget,
                      shortfall < 0 ? std::string("yes") : fmt::format("no, first shortfall at {}", shortfall),
                      routes_agree, secs)};
}

// ---------------------------------------------------------------------------
// 8. Timing-model directionality and trace checking

// Pairwise check: two instructions that touch the same cell, one of them
// writing, must not overlap and must run in dispatch order.
std::size_t independent_conflicts(const std::vector<sim::Event>& ev) {
  std::map<std::string, std::vector<std::pair<std::size_t, bool>>> cells;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].controller == "cpu") continue;
    for (const auto& r : ev[i].rows) {
      for (std::int64_t k = 0; k < r.count; ++k) {
        cells[r.mem + "#" + std::to_string(r.first + k * r.stride)].push_back({i, r.write});
      }
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> bad;
  for (const auto& [cell, uses] : cells) {
    for (std::size_t a = 0; a < uses.size(); ++a) {
      for (std::size_t b = a + 1; b < uses.size(); ++b) {
        auto [i, wi] = uses[a];
        auto [j, wj] = uses[b];
        if (i == j || !(wi || wj)) continue;
        if (ev[j].start_cycle < ev[i].end_cycle) bad.insert({i, j});
      }
    }
  }
  return bad.size();
}

Outcome criterion8() {
  struct Pair {
    std::string name;
    int M, K, N;
  };
  std::vector<std::string> fixture_lines;
  bool fixtures_ok = true;
  for (const auto& f : {Pair{"hoist_config", 64, 64, 64}, Pair{"double_buffer", 64, 64, 64},
                        Pair{"pipeline", 128, 256, 16}}) {
    auto spec = verify::gemm_spec(f.M, f.K, f.N);
    auto in = verify::random_inputs(spec, 8);
    auto before = compile_or_throw(read_asset("fixtures/" + f.name + "_before.gk"), sim::instance_a());
    auto after = compile_or_throw(read_asset("fixtures/" + f.name + "_after.gk"), sim::instance_a());
    sim::RunOptions timed;
    timed.timed = true;
    auto rb = before.run(in, timed), ra = after.run(in, timed);
    const bool ok = rb.ok && ra.ok && ra.arrays.at("C") == rb.arrays.at("C") &&
                    ra.perf->total_cycles < rb.perf->total_cycles;
    fixtures_ok = fixtures_ok && ok;
    fixture_lines.push_back(fmt::format("{} {} -> {}", f.name, rb.ok ? rb.perf->total_cycles : -1,
                                        ra.ok ? ra.perf->total_cycles : -1));
  }

  struct Kernel {
    sim::Program prog;
    verify::WorkloadSpec spec;
  };
  std::vector<Kernel> kernels;
  for (int s = 0; s < bench::gemm_stage_count(); ++s) {
    for (auto [M, K, N] : {std::array<int, 3>{64, 64, 64}, std::array<int, 3>{32, 128, 64},
                           std::array<int, 3>{48, 64, 128}}) {
      auto spec = verify::gemm_spec(M, K, N);
      kernels.push_back({compile_or_throw(bench::gemm_stage(M, K, N, s), sim::instance_a()), spec});
    }
  }
  for (const char* f : {"hoist_config_before", "hoist_config_after", "double_buffer_before", "double_buffer_after"}) {
    kernels.push_back({compile_or_throw(read_asset(fmt::format("fixtures/{}.gk", f)), sim::instance_a()),
                       verify::gemm_spec(64, 64, 64)});
  }
  for (const char* f : {"pipeline_before", "pipeline_after"}) {
    kernels.push_back({compile_or_throw(read_asset(fmt::format("fixtures/{}.gk", f)), sim::instance_a()),
                       verify::gemm_spec(128, 256, 16)});
  }
  auto mpc = verify::tinympc_spec(5);
  for (const char* f : {"tinympc_fwd_unopt.gk", "tinympc_fwd_autocomp.gk"}) {
    kernels.push_back({compile_or_throw(read_asset(std::string("kernels/") + f), sim::instance_b(), mpc.bindings()), mpc});
  }
  kernels.push_back({compile_or_throw(read_asset("kernels/conv_b1_c16x16_s9_k3_unopt.gk"), sim::instance_a()),
                     verify::conv_spec({})});

  // Both checkers must catch a planted overlap.
  sim::Event w{"mvin", "load", 0, 10, 30, {sim::RowRange{"spad", 0, 16, 1, true}}};
  sim::Event rd{"compute_preloaded", "execute", 1, 20, 40, {sim::RowRange{"spad", 8, 4, 1, false}}};
  const bool planted = independent_conflicts({w, rd}) == 1 && !sim::check_trace({w, rd}).empty();

  std::mt19937_64 rng(8);
  int clean = 0, failed_runs = 0;
  std::size_t module_flags = 0, independent_flags = 0, events = 0;
  for (int i = 0; i < kTimedRuns; ++i) {
    const auto& k = kernels[rng() % kernels.size()];
    sim::RunOptions o;
    o.timed = true;
    o.record_events = true;
    o.garbage_seed = rng();
    auto r = k.prog.run(verify::random_inputs(k.spec, rng()), o);
    if (!r.ok) {
      ++failed_runs;
      continue;
    }
    events += r.events.size();
    const auto m = sim::check_trace(r.events).size();
    const auto ind = independent_conflicts(r.events);
    module_flags += m, independent_flags += ind;
    clean += m == 0 && ind == 0;
  }
  return {fixtures_ok && planted && clean == kTimedRuns,
          fmt::format("fixtures {}; {}/{} random timed runs conflict-free ({} events; checker flags {}, pairwise "
                      "flags {}, failed runs {}); planted overlap caught: {}",
                      fmt::join(fixture_lines, ", "), clean, kTimedRuns, events, module_flags, independent_flags,
                      failed_runs, planted)};
}

// ---------------------------------------------------------------------------
// 9. Determinism of command outputs

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int sh(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Files under `dir`, relative path -> contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

Outcome criterion9(const fs::path& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "tensopt binary not given (--cli)"};
  const fs::path root = fs::temp_directory_path() / fmt::format("tensopt_determinism_{}", ::getpid());
  fs::remove_all(root);
  const std::string cfg = "assets/configs/gemm64_oracle.ini";
  const std::string kernel = "assets/kernels/gemm_64x64x64_unopt.gk";
  std::vector<std::string> codes;
  for (int run = 0; run < 2; ++run) {
    const fs::path d = root / fmt::format("run{}", run);
    fs::create_directories(d / "stdout");
    const std::string jobs = run == 0 ? "1" : "3";  // parallelism must not change any output
    auto go = [&](const std::string& name, const std::string& args) {
      int rc = sh(fmt::format("{} {} > {} 2> {}", quote(cli), args, quote(d / "stdout" / (name + ".out")),
                              quote(d / "stdout" / (name + ".err"))));
      codes.push_back(fmt::format("{}={}", name, rc));
    };
    go("simulate", fmt::format("simulate {} {} --timed --inputs 9", kernel, cfg));
    go("verify", fmt::format("verify {} {} --trials 2,3 --seed 5", kernel, cfg));
    go("optimize", fmt::format("optimize {} --out {} --jobs {}", cfg, quote(d / "optimize"), jobs));
    go("reuse", fmt::format("reuse {} --out {} --jobs {} --schedule {} --refine 1 --compare", cfg, quote(d / "reuse"),
                            jobs, quote(d / "optimize" / "schedule.json")));
    go("report_json", fmt::format("report {} --format json", quote(d / "optimize" / "trace.jsonl")));
    go("report_csv", fmt::format("report {} --format csv", quote(d / "reuse" / "trace.jsonl")));
  }
  auto a = snapshot(root / "run0"), b = snapshot(root / "run1");
  std::vector<std::string> differ;
  for (const auto& [name, text] : a) {
    if (!b.count(name) || b[name] != text) differ.push_back(name);
  }
  const bool all_zero = std::all_of(codes.begin(), codes.end(), [](const std::string& c) { return c.back() == '0'; });
  const bool same_set = a.size() == b.size();
  fs::remove_all(root);
  return {differ.empty() && same_set && all_zero && a.size() >= 20,
          fmt::format("{} output files compared across two runs (jobs 1 vs 3): {} differ{}; exit codes {}", a.size(),
                      differ.size(), differ.empty() ? "" : fmt::format(" ({})", fmt::join(differ, ", ")),
                      all_zero ? "all 0" : fmt::format("{}", fmt::join(codes, " ")))};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path cli;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      only.insert(std::stoi(a));
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", criterion1},
      {"corpus parity", criterion2},
      {"scripted 512^3 replay", criterion3},
      {"beam invariants", criterion4},
      {"menu dropout", criterion5},
      {"ensemble split", criterion6},
      {"reuse accounting and iso-budget", criterion7},
      {"timing directionality and trace checking", criterion8},
      {"determinism", [&] { return criterion9(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << fmt::format("criterion {} [{}] {}: {}", n, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail)
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
