#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tensopt/core/tensor.hpp"
#include "tensopt/dsl/ast.hpp"
#include "tensopt/dsl/diagnostic.hpp"
#include "tensopt/dsl/validate.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/sim/perf.hpp"

namespace tensopt::sim {

namespace detail {
struct Compiled;
}

struct RunOptions {
  bool timed = false;
  bool record_events = false;  // timed runs only
  // Seeds the contents of never-written scratchpad/accumulator rows so that
  // reads of uninitialized local memory show up as wrong outputs.
  std::uint64_t garbage_seed = 0;
  std::int64_t node_limit = 1'000'000'000;
};

struct RunResult {
  bool ok = false;
  std::string error;   // set when !ok
  TensorMap arrays;    // final contents of every parameter array
  std::optional<PerfReport> perf;
  std::vector<Event> events;
  std::int64_t nodes = 0;
  std::map<std::string, std::int64_t> counts;
};

struct ParamInfo {
  std::string name;
  ScalarType type = ScalarType::I8;
  std::vector<std::size_t> shape;
};

/// A kernel resolved against an accelerator configuration and ready to run
/// any number of times. Immutable and safe to share between threads.
class Program {
 public:
  struct CompileResult;

  static CompileResult compile(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                               const dsl::Bindings& bindings = {});

  /// Missing inputs are zero-filled. Provided arrays must match the declared
  /// shape and element type.
  RunResult run(const TensorMap& inputs, const RunOptions& opts = {}) const;

  const std::vector<ParamInfo>& params() const;
  const AcceleratorConfig& config() const;

 private:
  std::shared_ptr<const detail::Compiled> impl_;
};

struct Program::CompileResult {
  std::optional<Program> program;
  std::vector<dsl::Diagnostic> diagnostics;
};

/// Parse-free conveniences: compile and run once. Compilation problems are
/// reported through RunResult::error.
RunResult run_functional(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                         const TensorMap& inputs, const dsl::Bindings& bindings = {},
                         std::uint64_t garbage_seed = 0);
RunResult run_timed(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                    const TensorMap& inputs, const dsl::Bindings& bindings = {},
                    bool record_events = false, std::uint64_t garbage_seed = 0);

}  // namespace tensopt::sim
