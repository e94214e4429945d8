#include "tensopt/cli/commands.hpp"

#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tensopt/cli/run_config.hpp"
#include "tensopt/core/files.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/search/report.hpp"
#include "tensopt/sim/simulator.hpp"
#include "tensopt/verify/equivalence.hpp"

namespace tensopt::cli {
namespace {

namespace fs = std::filesystem;

// Thrown inside a command to leave with an exit code and a message for stderr.
struct Exit {
  int code;
  std::string message;
};

RunConfig config_or_exit(const fs::path& p, bool need_backend) {
  try {
    return load_run_config(p, need_backend);
  } catch (const ConfigError& e) {
    throw Exit{kExitInput, fmt::format("{}: {}", p.string(), e.what())};
  }
}

std::string read_or_exit(const fs::path& p) {
  try {
    return read_file(p);
  } catch (const std::exception& e) {
    throw Exit{kExitInput, e.what()};
  }
}

sim::Program compile_or_exit(const fs::path& kernel, const RunConfig& rc) {
  auto parsed = dsl::parse_kernel(read_or_exit(kernel));
  if (!parsed) throw Exit{kExitInput, fmt::format("{}:\n{}", kernel.string(), dsl::format(parsed.diagnostics))};
  auto c = sim::Program::compile(*parsed.program, rc.accel, rc.workload.bindings());
  if (!c.program) throw Exit{kExitInput, fmt::format("{}:\n{}", kernel.string(), dsl::format(c.diagnostics))};
  return *c.program;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Exit& e) {
    if (!e.message.empty()) err << e.message << (e.message.back() == '\n' ? "" : "\n");
    return e.code;
  }
}

int resolve_jobs(const std::optional<int>& jobs) {
  if (jobs) return std::max(1, *jobs);
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void write_or_exit(const fs::path& p, const std::string& text) {
  try {
    write_file(p, text);
  } catch (const std::exception& e) {
    throw Exit{kExitInput, e.what()};
  }
}

search::Report write_run_outputs(const fs::path& dir, const search::SearchResult& r) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Exit{kExitInput, fmt::format("cannot create {}: {}", dir.string(), ec.message())};
  auto report = search::build_report(r.trace);
  write_or_exit(dir / "trace.jsonl", search::format_trace(r.trace));
  write_or_exit(dir / "schedule.json", search::to_json(r.schedule).dump(2) + "\n");
  write_or_exit(dir / "report.json", search::to_json(report).dump(2) + "\n");
  write_or_exit(dir / "report.csv", search::to_csv(report));
  write_or_exit(dir / "best.gk", r.best().code_text);
  return report;
}

void print_summary(std::ostream& out, const search::SearchResult& r) {
  fmt::print(out, "speedup {:.3f}x: {} -> {} cycles, {} LLM calls ({} failed), {} schedule steps\n", r.speedup(),
             r.root().latency(), r.best().latency(), r.calls.total(), r.calls.failed_calls,
             r.schedule.steps.size());
}

struct Prepared {
  RunConfig rc;
  std::string start;
  std::shared_ptr<search::Evaluator> evaluator;
};

Prepared prepare_search(const OptimizeArgs& a) {
  Prepared p{config_or_exit(a.config, true), {}, nullptr};
  if (a.out) p.rc.output_dir = *a.out;
  p.rc.search.jobs = resolve_jobs(a.jobs);
  compile_or_exit(p.rc.start_kernel, p.rc);
  p.start = read_or_exit(p.rc.start_kernel);
  p.evaluator = std::make_shared<search::Evaluator>(p.rc.workload, p.rc.accel, p.rc.search.check);
  return p;
}

search::Backends backends_or_exit(const RunConfig& rc) {
  try {
    return make_backends(rc);
  } catch (const std::exception& e) {
    throw Exit{kExitInput, e.what()};
  }
}

template <class F>
search::SearchResult run_or_exit(F&& run) {
  try {
    return run();
  } catch (const search::SearchError& e) {
    throw Exit{e.kind == search::SearchError::Kind::StartIncorrect ? kExitStartIncorrect : kExitInput, e.what()};
  }
}

}  // namespace

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto rc = config_or_exit(a.config, false);
    auto prog = compile_or_exit(a.kernel, rc);
    sim::RunOptions opts;
    opts.timed = a.timed;
    sim::RunResult run;
    try {
      run = prog.run(verify::random_inputs(rc.workload, a.inputs_seed), opts);
    } catch (const std::exception& e) {
      throw Exit{kExitSim, fmt::format("simulation error: {}", e.what())};
    }
    if (!run.ok) throw Exit{kExitSim, fmt::format("simulation error: {}", run.error)};
    if (run.perf) {
      out << sim::compute_feedback(*run.perf, rc.accel) << "\n";
      out << sim::to_json(*run.perf).dump(2) << "\n";
    } else {
      nlohmann::json j{{"mode", "functional"}, {"nodes_evaluated", run.nodes}, {"counts", run.counts}};
      out << j.dump(2) << "\n";
    }
    return kExitOk;
  });
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto rc = config_or_exit(a.config, false);
    auto prog = compile_or_exit(a.kernel, rc);
    auto opts = rc.search.check;
    if (a.functional_trials) opts.n_functional = *a.functional_trials;
    if (a.timed_trials) opts.n_timed = *a.timed_trials;
    if (a.seed) opts.base_seed = *a.seed;
    if (opts.n_functional < 0 || opts.n_timed < 1) {
      throw Exit{kExitInput, "trials: need at least 0 functional and 1 timed trial"};
    }
    verify::Verdict v;
    try {
      v = verify::check_equivalence(prog, rc.workload, opts);
    } catch (const std::exception& e) {
      throw Exit{kExitSim, fmt::format("simulation error: {}", e.what())};
    }
    out << verify::to_json(v).dump(2) << "\n";
    return v.correct ? kExitOk : kExitIncorrect;
  });
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto p = prepare_search(a);
    auto backends = backends_or_exit(p.rc);
    auto r = run_or_exit([&] { return search::run_search(p.start, p.rc.search, backends, p.evaluator); });
    write_run_outputs(p.rc.output_dir, r);
    print_summary(out, r);
    return kExitOk;
  });
}

int cmd_reuse(const ReuseArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto p = prepare_search(a.base);
    search::Schedule recorded;
    try {
      recorded = search::schedule_from_json(nlohmann::json::parse(read_or_exit(a.schedule)));
    } catch (const Exit&) {
      throw;
    } catch (const std::exception& e) {
      throw Exit{kExitInput, fmt::format("{}: {}", a.schedule.string(), e.what())};
    }
    if (auto w = search::reuse_similarity_warning(recorded.fingerprint, p.rc.workload.fingerprint())) {
      err << "warning: " << *w << "\n";
    }
    const int refine = a.refine.value_or(p.rc.refine);
    if (refine < 0) throw Exit{kExitInput, "refine must be at least 0"};
    auto backends = backends_or_exit(p.rc);
    auto r = run_or_exit([&] {
      return search::run_reuse_search(p.start, recorded, p.rc.reuse, refine, p.rc.search, backends, p.evaluator);
    });
    auto report = write_run_outputs(p.rc.output_dir, r);
    print_summary(out, r);
    fmt::print(out, "calls: {} reuse, {} refine\n", r.calls_reuse, r.calls_refine);
    if (a.compare) {
      auto full_backends = backends_or_exit(p.rc);
      auto full = run_or_exit([&] { return search::run_search(p.start, p.rc.search, full_backends, p.evaluator); });
      auto full_report = write_run_outputs(p.rc.output_dir / "full", full);
      auto cmp = search::compare_iso_budget(full_report, report);
      write_or_exit(p.rc.output_dir / "iso_budget.json", search::to_json(cmp).dump(2) + "\n");
      write_or_exit(p.rc.output_dir / "iso_budget.csv", search::to_csv(cmp));
      if (cmp.reuse_dominates()) {
        fmt::print(out, "iso-budget: reuse matches or beats full search at every budget up to {} calls\n",
                   cmp.max_budget);
      } else {
        fmt::print(out, "iso-budget: reuse trails full search at {} calls\n", cmp.first_shortfall);
      }
    }
    return kExitOk;
  });
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (a.format != "json" && a.format != "csv") throw Exit{kExitInput, "format must be json or csv"};
    search::Report rep;
    try {
      rep = search::build_report(search::parse_trace(read_or_exit(a.trace)));
    } catch (const search::ReportError& e) {
      throw Exit{kExitInput, fmt::format("{}: {}", a.trace.string(), e.what())};
    }
    if (a.format == "json") {
      out << search::to_json(rep).dump(2) << "\n";
    } else {
      out << search::to_csv(rep);
    }
    return kExitOk;
  });
}

}  // namespace tensopt::cli
