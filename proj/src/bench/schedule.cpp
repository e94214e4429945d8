#include "tensopt/bench/schedule.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "tensopt/bench/gemm.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/dsl/printer.hpp"

namespace tensopt::bench {
namespace {

std::string canonical(const std::string& src) {
  auto r = dsl::parse_kernel(src);
  if (!r.program) throw std::logic_error("stage kernel does not parse");
  return dsl::print_kernel(*r.program);
}

}  // namespace

const std::vector<ScriptedStep>& gemm_schedule_steps() {
  static const std::vector<ScriptedStep> steps = {
      {"hoist redundant operations out of loops",
       "Compute the tile size, the accumulator base and the scratchpad bases once at the top of the "
       "kernel. Precompute the row and column offsets of each loop level in the loop that owns them "
       "so the inner loops only add small offsets."},
      {"double buffering",
       "Give the A and B tiles two scratchpad regions each and alternate between them on every "
       "(i, j) block, so loads for one block do not wait for computes that still read the other."},
      {"pipeline operations to better overlap computation and data movement",
       "Issue the loads for reduction chunk ko + 1 before the computes of chunk ko, so data "
       "movement for the next chunk overlaps the current matrix multiplications."},
      {"load data to the scratchpad across outer loop iterations and use if statements to prevent "
       "redundant loads on loops inner to those",
       "Move the column-block loop outside the row loop and load the whole B column block into its "
       "own scratchpad region once, guarded by i == 0. The A tiles keep two alternating regions."},
      {"move more data to the scratchpad in a more outer loop to increase data reuse",
       "Load a block of several A row tiles before the reduction loop and reuse each preloaded B "
       "tile for all of those rows by passing 0xffffffff as the B address."},
      {"double buffering",
       "Keep two A block regions. While one block is computed, fetch the next block in slices "
       "spread across the reduction loop."},
      {"double buffering",
       "Use two accumulator regions, so zeroing the next block does not wait for the stores of "
       "the previous block."},
      {"loop unrolling",
       "Unroll the output-tile and row loops inside the reduction loop and write every preload and "
       "compute with constant offsets."},
      {"fuse loops",
       "Fold the accumulator zero-fill into the first reduction step: the first compute of each "
       "block overwrites the accumulator instead of accumulating onto zeros."},
  };
  return steps;
}

std::string gemm_plan_response(int step) {
  const auto& steps = gemm_schedule_steps();
  if (step < 1 || step > static_cast<int>(steps.size())) throw std::out_of_range("no such schedule step");
  const auto& s = steps[static_cast<std::size_t>(step - 1)];
  return fmt::format("OPTIMIZATION: {}\n{}\n", s.menu_option, s.plan_text);
}

std::string gemm_code_response(int M, int K, int N, int stage) {
  return "Here is the rewritten kernel.\n```c\n" + gemm_stage(M, K, N, stage) + "```\n";
}

llm::ScriptManifest gemm_replay_manifest(int M, int K, int N) {
  llm::ScriptManifest m;
  for (int i = 1; i < gemm_stage_count(); ++i) {
    m.entries.push_back({llm::Phase::Plan, {}, gemm_plan_response(i), 1});
    m.entries.push_back({llm::Phase::Code, {}, gemm_code_response(M, K, N, i), 1});
  }
  return m;
}

llm::ScriptManifest gemm_oracle_manifest(int M, int K, int N) {
  const auto& steps = gemm_schedule_steps();
  llm::ScriptManifest m;
  for (int s = 0; s < gemm_stage_count(); ++s) {
    const std::string code = canonical(gemm_stage(M, K, N, s));
    if (s + 1 < gemm_stage_count()) {
      const auto& next = steps[static_cast<std::size_t>(s)];
      // Menu lines render as "<n>. <option>\n".
      m.entries.push_back({llm::Phase::Plan, {code, ". " + next.menu_option + "\n"}, gemm_plan_response(s + 1), 0});
      m.entries.push_back({llm::Phase::Code, {code, "OPTIMIZATION: " + next.menu_option + "\n"},
                           gemm_code_response(M, K, N, s + 1), 0});
    }
    m.entries.push_back({llm::Phase::Plan, {code},
                         "OPTIMIZATION: other methods not listed here.\nKeep the kernel as it is.\n", 0});
    m.entries.push_back({llm::Phase::Code, {code}, "```c\n" + code + "```\n", 0});
  }
  return m;
}

}  // namespace tensopt::bench
