#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <regex>

#include "support/stub_server.hpp"
#include "tensopt/bench/gemm.hpp"
#include "tensopt/bench/schedule.hpp"
#include "tensopt/core/files.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/dsl/printer.hpp"
#include "tensopt/search/report.hpp"
#include "tensopt/search/search.hpp"

using namespace tensopt;
using namespace tensopt::search;
using tensopt::testing::StubServer;

namespace {

verify::CheckOptions quick_checks() {
  verify::CheckOptions o;
  o.n_functional = 1;
  o.n_timed = 1;
  return o;
}

std::shared_ptr<const Evaluator> gemm_evaluator(int n) {
  return std::make_shared<Evaluator>(verify::gemm_spec(n, n, n), sim::instance_a(), quick_checks());
}

SearchConfig small_config(int B, int N, int K, int T) {
  SearchConfig sc = default_search_config();
  sc.B = B, sc.N = N, sc.K = K, sc.T = T;
  sc.check = quick_checks();
  return sc;
}

std::string canonical(const std::string& src) {
  auto r = dsl::parse_kernel(src);
  REQUIRE(r.program);
  return dsl::print_kernel(*r.program);
}

Backends scripted(llm::ScriptManifest m, const std::string& label = "scripted") {
  return {std::make_shared<llm::ScriptedBackend>(std::move(m), label)};
}

std::size_t count_kind(const SearchResult& r, const std::string& kind) {
  return static_cast<std::size_t>(std::count_if(r.trace.begin(), r.trace.end(),
                                                [&](const auto& j) { return j["kind"] == kind; }));
}

// Position of each heading in the prompt, in the order given; -1 when absent.
std::vector<long> positions(const std::string& prompt, const std::vector<std::string>& heads) {
  std::vector<long> out;
  for (const auto& h : heads) {
    auto p = prompt.find(h);
    out.push_back(p == std::string::npos ? -1 : static_cast<long>(p));
  }
  return out;
}

const PromptSubject kSubject{"void test() {\n  fence();\n}\n", "Latency: 11 cycles. Scratchpad utilization: 0.0 KB / 256 KB. Accumulator utilization: 0.0 KB / 64 KB."};

}  // namespace

TEST_CASE("shipped menus") {
  auto g = gemm_menu();
  auto f = fine_grained_menu();
  REQUIRE(g.options.size() == 17);
  REQUIRE(f.options.size() == 14);
  CHECK(g.options[0] == "modify loop tiling");
  CHECK(g.options[11] == "hoist redundant operations out of loops");
  CHECK(g.always_keep == std::vector<std::string>{"other methods not listed here."});
  CHECK(f.options[5] == "move cpu-based computation to the accelerator");
  CHECK(f.always_keep == std::vector<std::string>{"other methods not listed here"});
}

TEST_CASE("menu dropout limits") {
  auto g = gemm_menu();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) CHECK(draw_menu(g, 0.0, rng) == g.options);
  for (int i = 0; i < 200; ++i) {
    auto d = draw_menu(g, 1.0, rng);
    REQUIRE(d.size() == 2);
    CHECK(d.back() == g.always_keep.front());
    CHECK(d.front() != g.always_keep.front());
  }
  std::mt19937_64 r2(1);
  std::string text = render_menu(g, 0.5, r2);
  // survivors are renumbered 1..n
  std::regex item(R"((\d+)\. )");
  int expect = 1;
  for (std::sregex_iterator it(text.begin(), text.end(), item), end; it != end; ++it) {
    CHECK(std::stoi((*it)[1]) == expect++);
  }
  CHECK(text.rfind("<optimizations>:\n", 0) == 0);
  CHECK_THROWS(draw_menu(g, 1.5, rng));
}

TEST_CASE("menu dropout keeps menu order and every option is reachable") {
  auto g = gemm_menu();
  std::mt19937_64 rng(3);
  std::map<std::string, int> seen;
  for (int i = 0; i < 2000; ++i) {
    auto d = draw_menu(g, 0.7, rng);
    std::vector<std::size_t> idx;
    for (const auto& o : d) {
      ++seen[o];
      idx.push_back(static_cast<std::size_t>(std::find(g.options.begin(), g.options.end(), o) - g.options.begin()));
    }
    REQUIRE(std::is_sorted(idx.begin(), idx.end()));
  }
  CHECK(seen.size() == g.options.size());
  CHECK(seen[g.always_keep.front()] == 2000);
}

TEST_CASE("plan header parsing") {
  auto g = gemm_menu();
  SECTION("exact header") {
    auto p = parse_plan("OPTIMIZATION: loop unrolling\nUnroll the k loop by 4.", g);
    CHECK(p.menu_option == "loop unrolling");
    CHECK(p.plan_text == "Unroll the k loop by 4.");
  }
  SECTION("numbered, emphasized, trailing period") {
    auto p = parse_plan("**Optimization:** 12. Hoist redundant operations out of loops.\nplan", g);
    CHECK(p.menu_option == "hoist redundant operations out of loops");
  }
  SECTION("the kept line keeps its period") {
    auto p = parse_plan("OPTIMIZATION: other methods not listed here\nx", g);
    CHECK(p.menu_option == "other methods not listed here.");
  }
  SECTION("header naming no menu line falls back to a quoted line") {
    auto p = parse_plan("OPTIMIZATION: something clever\nWe will apply double buffering to A.", g);
    CHECK(p.menu_option == "double buffering");
  }
  SECTION("no header picks the longest quoted menu line") {
    auto p = parse_plan("I suggest: pipeline operations to better overlap computation and data movement, "
                        "which also needs loop unrolling.", g);
    CHECK(p.menu_option == "pipeline operations to better overlap computation and data movement");
    CHECK(p.plan_text.find("I suggest") == 0);
  }
  SECTION("nothing recognizable") {
    auto p = parse_plan("Make it faster somehow.", g);
    CHECK(p.menu_option == "other");
    CHECK(p.raw_response == "Make it faster somehow.");
  }
}

TEST_CASE("template filling") {
  std::string tpl = "A\n{{X}}\nB {{Y}} C\n{{Z}}\n{{UNKNOWN}}\n";
  auto out = fill_template(tpl, {{"X", ""}, {"Y", "{{X}}"}, {"Z", "z\n"}});
  CHECK(out == "A\nB {{X}} C\nz\n\n{{UNKNOWN}}\n");
}

TEST_CASE("plan prompt sections and ablations") {
  SearchConfig sc = default_search_config();
  sc.dropout_prob = 0.0;
  const auto cfg = sim::instance_a();
  const std::vector<std::string> heads{"Accelerator ISA:", "Current code:", "Feedback:", "Optimization menu:",
                                       "Instruction:", "Rules:", "OPTIMIZATION: <"};
  auto build = [&](const SearchConfig& c) {
    std::mt19937_64 rng(5);
    return build_plan_prompt(kSubject, c, cfg, rng);
  };
  const std::string full = build(sc);
  auto pos = positions(full, heads);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    INFO(heads[i]);
    REQUIRE(pos[i] >= 0);
    if (i > 0) CHECK(pos[i] > pos[i - 1]);
  }
  CHECK(full.find(sim::accelerator_summary(cfg) + " Select exactly one optimization from the menu") != std::string::npos);
  CHECK(full.find(format_menu(sc.menu.options)) != std::string::npos);
  CHECK(full.find(kSubject.feedback) != std::string::npos);
  CHECK(full.find(sc.prompts.rules) != std::string::npos);

  auto without = [&](std::string s, const std::string& section) {
    auto p = s.find(section);
    REQUIRE(p != std::string::npos);
    return s.erase(p, section.size());
  };
  SECTION("no ISA removes exactly the ISA block") {
    auto c = sc;
    c.ablations.include_isa = false;
    CHECK(build(c) == without(full, sc.prompts.isa_text + "\n"));
  }
  SECTION("no feedback removes exactly the feedback block") {
    auto c = sc;
    c.ablations.include_feedback = false;
    CHECK(build(c) == without(full, "Feedback:\n" + kSubject.feedback + "\n\n"));
  }
  SECTION("no menu removes the menu and drops 'from the menu' from the instruction") {
    auto c = sc;
    c.ablations.include_menu = false;
    std::string expect = without(full, "Optimization menu:\n" + format_menu(sc.menu.options) + "\n");
    expect = std::regex_replace(expect, std::regex("one optimization from the menu and"), "one optimization and");
    CHECK(build(c) == expect);
  }
  SECTION("dropout only changes the menu") {
    auto c = sc;
    c.dropout_prob = 0.7;
    std::string a = build(c);
    c.ablations.enable_dropout = false;
    CHECK(build(c) == full);
    auto strip = [](const std::string& s) {
      return std::regex_replace(s, std::regex(R"(Optimization menu:\n<optimizations>:\n(\d+\. [^\n]*\n)*)"), "");
    };
    CHECK(a != full);
    CHECK(strip(a) == strip(full));
  }
}

TEST_CASE("reuse constraint replaces the menu with the recorded option") {
  SearchConfig sc = default_search_config();
  std::mt19937_64 rng(1);
  auto p = build_plan_prompt(kSubject, sc, sim::instance_a(), rng,
                             ReuseConstraint{"double buffering", "Alternate two A regions."});
  CHECK(p.find("Optimization menu:\n<optimizations>:\n1. double buffering\n") != std::string::npos);
  CHECK(p.substr(0, p.find("Rules:")).find("2. ") == std::string::npos);
  CHECK(p.find("Alternate two A regions.") != std::string::npos);
  for (const auto& o : sc.menu.options) {
    if (o != "double buffering") CHECK(p.find(o) == std::string::npos);
  }
  sc.reuse_hint = false;
  std::mt19937_64 rng2(1);
  auto q = build_plan_prompt(kSubject, sc, sim::instance_a(), rng2, ReuseConstraint{"double buffering", "Alternate two A regions."});
  CHECK(q.find("Alternate two A regions.") == std::string::npos);
}

TEST_CASE("code prompt sections and the tiling example") {
  SearchConfig sc = default_search_config();
  const auto cfg = sim::instance_a();
  Plan tiling{"modify loop tiling", "Grow the N tile to 128.", "OPTIMIZATION: modify loop tiling\nGrow the N tile to 128."};
  Plan unroll{"loop unrolling", "Unroll k.", "OPTIMIZATION: loop unrolling\nUnroll k."};
  Plan hidden{"other", "Change the TILING of j.", "Change the TILING of j."};
  auto a = build_code_prompt(kSubject, tiling, sc, cfg);
  auto b = build_code_prompt(kSubject, unroll, sc, cfg);
  auto pos = positions(a, {"Accelerator ISA:", "Current code:", "Generated plan:", "Example of changing one tiling factor",
                           "Instruction:", "Rules:"});
  for (std::size_t i = 0; i < pos.size(); ++i) {
    REQUIRE(pos[i] >= 0);
    if (i > 0) CHECK(pos[i] > pos[i - 1]);
  }
  CHECK(b.find("Example of changing one tiling factor") == std::string::npos);
  CHECK(wants_tiling_example(hidden));
  CHECK_FALSE(wants_tiling_example(unroll));
  CHECK(b.find("1. The rewritten program should be semantically equivalent to the original program") != std::string::npos);
  CHECK(b.find("9. If increasing loaded tile size, update base scratchpad addresses to fit new tile size") != std::string::npos);
  CHECK(b.find("Apply the above plan and output optimized accelerator code") != std::string::npos);
  CHECK(b.find("OPTIMIZATION: loop unrolling\nUnroll k.") != std::string::npos);
}

TEST_CASE("tiling example kernels are both correct") {
  std::string icl = read_asset("prompts/icl_tiling.txt");
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while ((pos = icl.find("```c\n", pos)) != std::string::npos) {
    auto end = icl.find("```", pos + 5);
    blocks.push_back(icl.substr(pos + 5, end - pos - 5));
    pos = end + 3;
  }
  REQUIRE(blocks.size() == 2);
  Evaluator ev(verify::gemm_spec(64, 64, 256), sim::instance_a());
  for (auto src : blocks) {
    src = std::regex_replace(src, std::regex(R"(\bP\b)"), "A");
    src = std::regex_replace(src, std::regex(R"(\bQ\b)"), "B");
    src = std::regex_replace(src, std::regex(R"(\bR\b)"), "C");
    auto e = ev.evaluate(src);
    INFO((e.verdict.first_mismatch ? e.verdict.first_mismatch->reason : std::string()));
    REQUIRE(e.verdict.correct);
  }
}

TEST_CASE("evaluator canonicalizes and caches") {
  Evaluator ev(verify::gemm_spec(64, 64, 64), sim::instance_a(), quick_checks());
  std::string src = bench::gemm_stage(64, 64, 64, 0);
  auto a = ev.evaluate(src);
  REQUIRE(a.parsed);
  CHECK(a.verdict.correct);
  CHECK_FALSE(a.cached);
  auto b = ev.evaluate("// a comment\n" + src);
  CHECK(b.cached);
  CHECK(b.code_text == a.code_text);
  CHECK(b.code_hash == a.code_hash);
  CHECK(ev.evaluations() == 1);
  CHECK(ev.cache_hits() == 1);
  auto bad = ev.evaluate("void test( {");
  CHECK_FALSE(bad.parsed);
  CHECK_FALSE(bad.verdict.correct);
  CHECK(bad.verdict.first_mismatch->reason.rfind("parse error", 0) == 0);
}

TEST_CASE("T = 0 returns the root with an empty schedule") {
  auto sc = small_config(1, 1, 1, 0);
  auto r = run_search(bench::gemm_stage(64, 64, 64, 0), sc, scripted({}), gemm_evaluator(64));
  CHECK(r.candidates.size() == 1);
  CHECK(r.best().id == 0);
  CHECK(r.schedule.steps.empty());
  CHECK(r.speedup() == 1.0);
  CHECK(r.calls.total() == 0);
  CHECK(count_kind(r, "verdict") == 1);
}

TEST_CASE("a hoisting child enters the beam with lower latency") {
  auto sc = small_config(2, 1, 1, 1);
  llm::ScriptManifest m;
  m.entries = {{llm::Phase::Plan, {}, bench::gemm_plan_response(1), 1},
               {llm::Phase::Code, {}, bench::gemm_code_response(64, 64, 64, 1), 1}};
  auto r = run_search(bench::gemm_stage(64, 64, 64, 0), sc, scripted(m), gemm_evaluator(64));
  REQUIRE(r.candidates.size() == 2);
  const auto& child = r.candidates[1];
  CHECK(child.accepted);
  CHECK(child.latency() < r.root().latency());
  CHECK(r.beam.members == std::vector<int>{1, 0});
  CHECK(r.best().id == 1);
  REQUIRE(r.schedule.steps.size() == 1);
  CHECK(r.schedule.steps[0].menu_option == "hoist redundant operations out of loops");
  CHECK(r.schedule.steps[0].latency_before == r.root().latency());
  CHECK(r.schedule.steps[0].latency_after == child.latency());
  CHECK(r.schedule.fingerprint == "gemm:64x64x64:int8");
}

TEST_CASE("failing children leave the beam unchanged") {
  auto sc = small_config(3, 2, 2, 2);
  const std::string start = bench::gemm_stage(64, 64, 64, 0);
  std::string broken = start;
  broken.replace(broken.find("mvout"), 5, "mvin");  // wrong direction
  llm::ScriptManifest m;
  m.entries = {{llm::Phase::Plan, {}, "OPTIMIZATION: loop unrolling\nunroll", 0},
               {llm::Phase::Code, {}, "no code here", 2},
               {llm::Phase::Code, {}, "```c\nvoid test( {\n```", 2},
               {llm::Phase::Code, {}, "```c\n" + broken + "```", 2},
               {llm::Phase::Code, {}, "```c\n" + start + "```", 0}};  // correct but not faster
  auto r = run_search(start, sc, scripted(m), gemm_evaluator(64));
  CHECK(r.beam.members == std::vector<int>{0});
  CHECK(r.best().id == 0);
  CHECK(r.candidates.size() == 9);
  for (std::size_t i = 1; i < r.candidates.size(); ++i) CHECK_FALSE(r.candidates[i].accepted);
  CHECK(r.candidates[1].verdict.first_mismatch->reason == "no code block in the response");
  CHECK(r.candidates[8].verdict.correct);
  CHECK(r.calls.plan_calls == 4);
  CHECK(r.calls.code_calls == 8);
}

TEST_CASE("call accounting is exact without failures and failures never abort") {
  const std::string start = bench::gemm_stage(64, 64, 64, 0);
  llm::ScriptManifest m;
  m.entries = {{llm::Phase::Plan, {}, "OPTIMIZATION: loop unrolling\nunroll", 0},
               {llm::Phase::Code, {}, "```c\n" + start + "```", 0}};
  auto r = run_search(start, small_config(2, 3, 2, 2), scripted(m), gemm_evaluator(64));
  // The beam never grows past the root: 1 * 3 plans and 3 * 2 codes per iteration.
  CHECK(r.calls.plan_calls == 6);
  CHECK(r.calls.code_calls == 12);
  CHECK(count_kind(r, "plan_request") == 6);
  CHECK(count_kind(r, "code_response") == 12);

  llm::ScriptManifest few;
  few.entries = {{llm::Phase::Plan, {}, "OPTIMIZATION: loop unrolling\nunroll", 2},
                 {llm::Phase::Code, {}, "```c\n" + start + "```", 1}};
  auto f = run_search(start, small_config(2, 3, 2, 2), scripted(few), gemm_evaluator(64));
  CHECK(f.calls.plan_calls == 6);
  // Iteration 1: two plans succeed, so 4 code requests of which 1 succeeds.
  // Iteration 2: every plan fails and no code is requested.
  CHECK(f.calls.code_calls == 4);
  CHECK(f.calls.failed_calls == 1 + 3 + 3);
  CHECK(f.beam.iteration == 2);
}

TEST_CASE("ensemble splits plan and code samples between models") {
  const std::string start = bench::gemm_stage(64, 64, 64, 0);
  llm::ScriptManifest m;
  m.entries = {{llm::Phase::Plan, {}, "OPTIMIZATION: loop unrolling\nunroll", 0},
               {llm::Phase::Code, {}, "```c\n" + start + "```", 0}};
  auto a = std::make_shared<llm::ScriptedBackend>(m, "m0");
  auto b = std::make_shared<llm::ScriptedBackend>(m, "m1");
  auto sc = small_config(1, 5, 2, 1);
  auto r = run_search(start, sc, {a, b}, gemm_evaluator(64));
  CHECK(a->calls() == 3 + 5);
  CHECK(b->calls() == 2 + 5);
  sc.ablations.enable_ensemble = false;
  auto a2 = std::make_shared<llm::ScriptedBackend>(m, "m0");
  auto b2 = std::make_shared<llm::ScriptedBackend>(m, "m1");
  run_search(start, sc, {a2, b2}, gemm_evaluator(64));
  CHECK(a2->calls() == 15);
  CHECK(b2->calls() == 0);
}

TEST_CASE("search errors") {
  auto sc = small_config(1, 1, 1, 1);
  std::string start = bench::gemm_stage(64, 64, 64, 0);
  std::string wrong = start;
  wrong.replace(wrong.find("i < 4"), 5, "i < 3");
  try {
    run_search(wrong, sc, scripted({}), gemm_evaluator(64));
    FAIL("expected an error");
  } catch (const SearchError& e) {
    CHECK(e.kind == SearchError::Kind::StartIncorrect);
  }
  try {
    run_search(start, sc, {}, gemm_evaluator(64));
    FAIL("expected an error");
  } catch (const SearchError& e) {
    CHECK(e.kind == SearchError::Kind::NoBackends);
  }
  sc.B = 0;
  CHECK_THROWS_AS(run_search(start, sc, scripted({}), gemm_evaluator(64)), SearchError);
}

TEST_CASE("replayed schedule search is deterministic and records the schedule") {
  // 64^3 stages are not all improvements; the filter keeps only the ones that are.
  auto sc = small_config(1, 1, 1, 9);
  sc.seed = 11;
  auto run = [&] {
    return run_search(bench::gemm_stage(64, 64, 64, 0), sc, scripted(bench::gemm_replay_manifest(64, 64, 64)),
                      gemm_evaluator(64));
  };
  auto r1 = run();
  auto r2 = run();
  CHECK(format_trace(r1.trace) == format_trace(r2.trace));
  CHECK(to_json(r1.schedule) == to_json(r2.schedule));
  CHECK(schedule_from_json(to_json(r1.schedule)) == r1.schedule);
  const auto& steps = r1.schedule.steps;
  REQUIRE_FALSE(steps.empty());
  CHECK(steps.front().latency_before == r1.root().latency());
  CHECK(steps.back().latency_after == r1.best().latency());
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) CHECK(steps[i].latency_after == steps[i + 1].latency_before);
  for (const auto& s : steps) CHECK(s.latency_after < s.latency_before);
  // Stage 9 is the fastest 64^3 stage.
  CHECK(r1.best().code_text == canonical(bench::gemm_stage(64, 64, 64, 9)));
}

TEST_CASE("report from a three-iteration run") {
  auto sc = small_config(2, 2, 1, 3);
  auto r = run_search(bench::gemm_stage(64, 64, 64, 0), sc, scripted(bench::gemm_oracle_manifest(64, 64, 64)),
                      gemm_evaluator(64));
  auto rep = build_report(r.trace);
  REQUIRE(rep.iterations.size() == 3);
  for (std::size_t i = 1; i < rep.iterations.size(); ++i) {
    CHECK(rep.iterations[i].best_latency <= rep.iterations[i - 1].best_latency);
  }
  CHECK(rep.start_latency == r.root().latency());
  CHECK(rep.best_latency == r.best().latency());
  CHECK(rep.plan_calls == r.calls.plan_calls);
  CHECK(rep.code_calls == r.calls.code_calls);
  CHECK(rep.schedule.size() == r.schedule.steps.size());
  CHECK(rep.curve.back().calls == r.calls.total());
  CHECK(rep.curve.back().best_latency == r.best().latency());
  auto csv = to_csv(rep);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  auto j = to_json(rep);
  for (const char* k : {"start_latency", "best_latency", "speedup", "iterations", "calls", "tokens", "candidates",
                        "schedule", "curve", "calls_reuse", "calls_refine"}) {
    CHECK(j.contains(k));
  }
  // JSON lines round trip
  CHECK(parse_trace(format_trace(r.trace)) == r.trace);
}

TEST_CASE("report edge cases") {
  auto empty = build_report({});
  CHECK(empty.iterations.empty());
  CHECK(to_csv(empty).find('\n') == to_csv(empty).size() - 1);
  CHECK_THROWS_AS(parse_trace("{\"kind\": \"beam\"}\nnot json\n"), ReportError);
  CHECK_THROWS_AS(build_report({nlohmann::json{{"kind", "beam"}, {"iteration", 1}, {"ids", {}}, {"payload", {}}}}),
                  ReportError);
  CHECK_THROWS_AS(build_report({nlohmann::json{{"kind", "mystery"}, {"iteration", 1}, {"ids", {}}, {"payload", {}}}}),
                  ReportError);
}

TEST_CASE("best_at and iso-budget comparison") {
  std::vector<CurvePoint> c{{5, 90}, {20, 70}};
  CHECK(best_at(c, 4, 100) == 100);
  CHECK(best_at(c, 5, 100) == 90);
  CHECK(best_at(c, 100, 100) == 70);
  Report full, reuse;
  full.start_latency = reuse.start_latency = 100;
  full.curve = {{10, 80}, {30, 60}};
  full.plan_calls = 30;
  reuse.curve = {{4, 80}, {12, 50}};
  reuse.plan_calls = 12;
  auto cmp = compare_iso_budget(full, reuse);
  CHECK(cmp.reuse_dominates());
  CHECK(cmp.max_budget == 30);
  reuse.curve = {{11, 80}};
  auto worse = compare_iso_budget(full, reuse);
  CHECK(worse.first_shortfall == 10);
}

TEST_CASE("reuse search accounting") {
  auto sc = small_config(6, 6, 2, 1);
  Schedule recorded;
  recorded.fingerprint = "gemm:64x64x64:int8";
  for (int i = 0; i < 9; ++i) {
    const auto& s = bench::gemm_schedule_steps()[static_cast<std::size_t>(i)];
    recorded.steps.push_back({s.menu_option, s.plan_text, 100 - i, 99 - i});
  }
  auto r = run_reuse_search(bench::gemm_stage(64, 64, 64, 0), recorded, {2, 2, 2}, 0, sc,
                            scripted(bench::gemm_oracle_manifest(64, 64, 64)), gemm_evaluator(64));
  CHECK(r.calls_reuse <= 108);
  CHECK(r.calls_reuse == r.calls.total());
  CHECK(r.calls_refine == 0);
  auto rep = build_report(r.trace);
  CHECK(rep.calls_reuse == r.calls_reuse);
  CHECK(rep.iterations.size() == 9);
  for (const auto& row : rep.iterations) CHECK(row.phase == "reuse");
  // every reuse-phase plan prompt offers exactly the recorded option
  int checked = 0;
  for (const auto& t : r.trace) {
    if (t["kind"] != "plan_request") continue;
    const std::string p = t["payload"]["prompt"];
    CHECK(p.find("<optimizations>:\n1. ") != std::string::npos);
    auto menu_at = p.find("<optimizations>:\n");
    CHECK(p.substr(menu_at, p.find("Instruction:") - menu_at).find("\n2. ") == std::string::npos);
    ++checked;
  }
  CHECK(checked == r.calls.plan_calls);

  auto refined = run_reuse_search(bench::gemm_stage(64, 64, 64, 0), recorded, {2, 2, 2}, 1, sc,
                                  scripted(bench::gemm_oracle_manifest(64, 64, 64)), gemm_evaluator(64));
  CHECK(refined.calls_reuse == r.calls_reuse);
  CHECK(refined.calls_refine == 6 + 12);  // one beam member after the collapse
  CHECK(refined.best().latency() <= r.best().latency());
  CHECK_THROWS_AS(run_reuse_search(bench::gemm_stage(64, 64, 64, 0), Schedule{}, {2, 2, 2}, 0, sc,
                                   scripted({}), gemm_evaluator(64)),
                  SearchError);
}

TEST_CASE("reuse similarity warnings") {
  CHECK_FALSE(reuse_similarity_warning("gemm:512x512x512:int8", "gemm:512x512x256:int8"));
  CHECK(reuse_similarity_warning("gemm:512x512x512:int8", "gemm:256x512x256:int8"));
  CHECK(reuse_similarity_warning("gemm:512x512x512:int8", "conv:b1:c16x16:s9:k3:st1:int8"));
  CHECK(reuse_similarity_warning("gemm:64x64x64:int8", "gemm:64x64x64:float32"));
  CHECK_FALSE(reuse_similarity_warning("tinympc:h5:float32", "tinympc:h5:float32"));
  CHECK(reuse_similarity_warning("tinympc:h5:float32", "tinympc:h10:float32"));
}

TEST_CASE("http provider errors become failed samples") {
  std::atomic<int> code_requests{0};
  const std::string start = bench::gemm_stage(64, 64, 64, 0);
  StubServer srv([&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    const std::string prompt = body["messages"][0]["content"];
    if (prompt.find("Answer format") != std::string::npos) {
      res.set_content(StubServer::completion_body(bench::gemm_plan_response(1)), "application/json");
    } else if (code_requests++ % 2 == 0) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"maximum context length exceeded"}})", "application/json");
    } else {
      res.set_content(StubServer::completion_body(bench::gemm_code_response(64, 64, 64, 1)), "application/json");
    }
  });
  llm::ModelSpec spec;
  spec.endpoint = srv.endpoint();
  spec.model = "stub";
  spec.backoff_s = 0.01;
  auto sc = small_config(2, 2, 2, 1);
  sc.jobs = 2;
  auto r = run_search(start, sc, {std::make_shared<llm::HttpBackend>(spec)}, gemm_evaluator(64));
  CHECK(r.calls.plan_calls == 2);
  CHECK(r.calls.code_calls == 4);
  CHECK(r.calls.failed_calls == 2);
  CHECK(r.calls.prompt_tokens == 11 * 4);
  CHECK(r.best().latency() < r.root().latency());
}
