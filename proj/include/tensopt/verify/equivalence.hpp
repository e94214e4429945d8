#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tensopt/dsl/ast.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/sim/perf.hpp"
#include "tensopt/sim/simulator.hpp"
#include "tensopt/verify/workload.hpp"

namespace tensopt::verify {

struct CheckOptions {
  int n_functional = 5;
  int n_timed = 20;
  std::uint64_t base_seed = 0;
  std::int64_t node_limit = 1'000'000'000;
};

struct Mismatch {
  int trial = -1;          // -1: before any trial (signature/compile problems)
  std::string param;
  std::size_t index = 0;   // flat element index
  double expected = 0.0;
  double actual = 0.0;
  std::string reason;      // empty for a plain value mismatch

  bool operator==(const Mismatch&) const = default;
};

struct Verdict {
  bool correct = false;
  int trials_run = 0;
  int simulator_runs = 0;
  std::optional<Mismatch> first_mismatch;
  std::optional<std::int64_t> latency_cycles;  // present iff correct
  std::optional<sim::PerfReport> perf;         // canonical timed trial

  bool operator==(const Verdict&) const = default;
};

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

/// Seed of trial `t` (0-based, functional trials first). The first timed trial
/// always uses `base_seed` itself; that is the canonical latency measurement.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial, int n_functional);

/// |actual - expected| <= max(1e-5 * |expected|, 1e-6) for floats; exact for ints.
bool values_match(double expected, double actual, bool is_float);

/// Runs the functional trials, then (when all pass) the timed ones, comparing
/// every output against the oracle.
Verdict check_equivalence(const dsl::KernelProgram& p, const WorkloadSpec& spec,
                          const sim::AcceleratorConfig& cfg, const CheckOptions& opts = {});
Verdict check_equivalence(const sim::Program& prog, const WorkloadSpec& spec,
                          const CheckOptions& opts = {});

}  // namespace tensopt::verify
