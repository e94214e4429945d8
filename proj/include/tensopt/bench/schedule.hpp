#pragma once

#include <string>
#include <vector>

#include "tensopt/llm/backend.hpp"

namespace tensopt::bench {

struct ScriptedStep {
  std::string menu_option;
  std::string plan_text;
};

/// The nine steps behind gemm_stage(): step i turns stage i - 1 into stage i.
const std::vector<ScriptedStep>& gemm_schedule_steps();

/// Plan response text for step i (1-based): header line plus plan.
std::string gemm_plan_response(int step);
/// Code response text: the stage kernel in a fenced block.
std::string gemm_code_response(int M, int K, int N, int stage);

/// Replay for a B = N = K = 1 search: plan i, code i, in order.
llm::ScriptManifest gemm_replay_manifest(int M, int K, int N);

/// A prompt-driven stand-in for a model that knows the schedule. Given stage
/// s as the current code, it plans step s + 1 when that option is on the menu
/// it was shown and otherwise answers "other methods" with an unchanged
/// kernel. Code requests for step s + 1 return stage s + 1.
llm::ScriptManifest gemm_oracle_manifest(int M, int K, int N);

}  // namespace tensopt::bench
