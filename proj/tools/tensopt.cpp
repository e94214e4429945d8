#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "tensopt/cli/commands.hpp"

using namespace tensopt::cli;

namespace {

// "F,T" -> functional and timed trial counts.
bool parse_trials(const std::string& s, VerifyArgs& v) {
  std::smatch m;
  static const std::regex re(R"(^\s*(\d+)\s*,\s*(\d+)\s*$)");
  if (!std::regex_match(s, m, re)) return false;
  v.functional_trials = std::stoi(m[1]);
  v.timed_trials = std::stoi(m[2]);
  return true;
}

void add_search_flags(CLI::App* cmd, OptimizeArgs& a, std::optional<std::string>& out) {
  cmd->add_option("config", a.config, "run config (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", out, "output directory (overrides [output] dir)");
  cmd->add_option("--jobs", a.jobs, "parallel evaluations and requests (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensopt: accelerator kernel simulator, verifier and LLM-guided optimizer"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a kernel once and print its performance report");
  simulate->add_option("kernel", sim.kernel, ".gk kernel")->required();
  simulate->add_option("config", sim.config, "run config (INI)")->required();
  simulate->add_flag("--timed", sim.timed, "timed run (otherwise functional only)");
  simulate->add_option("--inputs", sim.inputs_seed, "seed for the random inputs");

  VerifyArgs ver;
  std::string trials;
  auto* verify = app.add_subcommand("verify", "check a kernel against the workload's reference");
  verify->add_option("kernel", ver.kernel, ".gk kernel")->required();
  verify->add_option("config", ver.config, "run config (INI)")->required();
  verify->add_option("--trials", trials, "functional,timed trial counts, e.g. 5,20");
  verify->add_option("--seed", ver.seed, "base seed for trial inputs");

  OptimizeArgs opt;
  std::optional<std::string> opt_out;
  auto* optimize = app.add_subcommand("optimize", "run the beam search");
  add_search_flags(optimize, opt, opt_out);

  ReuseArgs reu;
  std::optional<std::string> reu_out;
  std::string schedule;
  auto* reuse = app.add_subcommand("reuse", "follow a recorded schedule, then optionally refine");
  add_search_flags(reuse, reu.base, reu_out);
  reuse->add_option("--schedule", schedule, "schedule.json from an earlier run")->required();
  reuse->add_option("--refine", reu.refine, "full-menu iterations after the schedule (overrides [reuse] refine)");
  reuse->add_flag("--compare", reu.compare, "also run the full search and write iso-budget curves");

  ReportArgs rep;
  std::string trace;
  auto* report = app.add_subcommand("report", "summarize a trace");
  report->add_option("trace", trace, "trace.jsonl")->required();
  report->add_option("--format", rep.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*verify) {
    if (!trials.empty() && !parse_trials(trials, ver)) {
      std::cerr << "--trials: expected F,T (two non-negative integers)\n";
      return kExitInput;
    }
    return cmd_verify(ver, std::cout, std::cerr);
  }
  if (*optimize) {
    if (opt_out) opt.out = *opt_out;
    return cmd_optimize(opt, std::cout, std::cerr);
  }
  if (*reuse) {
    if (reu_out) reu.base.out = *reu_out;
    reu.schedule = schedule;
    return cmd_reuse(reu, std::cout, std::cerr);
  }
  rep.trace = trace;
  return cmd_report(rep, std::cout, std::cerr);
}
