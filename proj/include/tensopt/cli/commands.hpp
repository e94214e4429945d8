#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace tensopt::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIncorrect = 1;
inline constexpr int kExitInput = 2;  // unreadable, malformed or invalid input
inline constexpr int kExitSim = 3;
inline constexpr int kExitStartIncorrect = 4;

struct SimulateArgs {
  std::filesystem::path kernel, config;
  bool timed = false;
  std::uint64_t inputs_seed = 0;
};

struct VerifyArgs {
  std::filesystem::path kernel, config;
  std::optional<int> functional_trials, timed_trials;
  std::optional<std::uint64_t> seed;
};

struct OptimizeArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<int> jobs;
};

struct ReuseArgs {
  OptimizeArgs base;
  std::filesystem::path schedule;
  std::optional<int> refine;
  bool compare = false;  // also run the full search and write iso-budget curves
};

struct ReportArgs {
  std::filesystem::path trace;
  std::string format = "json";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err);
int cmd_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err);
int cmd_reuse(const ReuseArgs& a, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err);

}  // namespace tensopt::cli
