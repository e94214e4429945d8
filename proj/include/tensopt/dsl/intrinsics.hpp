#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace tensopt::dsl {

enum class Intrinsic {
  ConfigEx,
  ConfigLd,
  Mvin,
  Mvin2,
  Mvin3,
  Preload,
  ComputePreloaded,
  ComputeAccumulated,
  ConfigSt,
  Mvout,
  Fence,
  NegateMatrix,
  AddMatrix,
  // Hardware-FSM entry points. Recognized so reference listings parse; the
  // simulator does not execute them.
  FsmConfigEx,
  FsmConfigLd,
  FsmConfigSt,
  FsmLoopWs,
  FsmFence,
};

/// How an intrinsic argument is interpreted.
enum class ArgRole {
  Scalar,      // CPU integer/float value
  DramAddr,    // array reference (or literal 0 where zero_dram_ok)
  LocalAddr,   // 32-bit scratchpad/accumulator address
  Any,         // parse-only intrinsics
};

struct IntrinsicInfo {
  Intrinsic id;
  std::string_view name;
  int min_args;
  int max_args;
  bool executable;
  std::span<const ArgRole> roles;  // size == max_args, or empty for Any
};

std::optional<IntrinsicInfo> lookup_intrinsic(std::string_view name);
const IntrinsicInfo& intrinsic_info(Intrinsic id);

/// Named integer constants usable in kernels (dataflow, activation, booleans).
std::optional<long long> builtin_constant(std::string_view name);

}  // namespace tensopt::dsl
