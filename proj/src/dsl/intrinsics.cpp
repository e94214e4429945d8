#include "tensopt/dsl/intrinsics.hpp"

#include <array>

namespace tensopt::dsl {
namespace {

using R = ArgRole;

constexpr std::array<ArgRole, 5> kConfigEx{R::Scalar, R::Scalar, R::Scalar, R::Scalar, R::Scalar};
constexpr std::array<ArgRole, 4> kConfigLd{R::Scalar, R::Scalar, R::Scalar, R::Scalar};
constexpr std::array<ArgRole, 4> kMove{R::DramAddr, R::LocalAddr, R::Scalar, R::Scalar};
constexpr std::array<ArgRole, 6> kPreload{R::LocalAddr, R::LocalAddr, R::Scalar,
                                          R::Scalar,    R::Scalar,    R::Scalar};
constexpr std::array<ArgRole, 6> kCompute{R::LocalAddr, R::LocalAddr, R::Scalar,
                                          R::Scalar,    R::Scalar,    R::Scalar};
constexpr std::array<ArgRole, 2> kConfigSt{R::Scalar, R::Scalar};
constexpr std::array<ArgRole, 4> kNegate{R::DramAddr, R::DramAddr, R::Scalar, R::Scalar};
constexpr std::array<ArgRole, 5> kAdd{R::DramAddr, R::DramAddr, R::DramAddr, R::Scalar,
                                      R::Scalar};

const std::array<IntrinsicInfo, 18> kTable{{
    {Intrinsic::ConfigEx, "config_ex", 5, 5, true, kConfigEx},
    {Intrinsic::ConfigLd, "config_ld", 4, 4, true, kConfigLd},
    {Intrinsic::Mvin, "mvin", 4, 4, true, kMove},
    {Intrinsic::Mvin2, "mvin2", 4, 4, true, kMove},
    {Intrinsic::Mvin3, "mvin3", 4, 4, true, kMove},
    {Intrinsic::Preload, "preload", 6, 6, true, kPreload},
    {Intrinsic::ComputePreloaded, "compute_preloaded", 6, 6, true, kCompute},
    {Intrinsic::ComputeAccumulated, "compute_accumulated", 6, 6, true, kCompute},
    {Intrinsic::ConfigSt, "config_st", 1, 2, true, kConfigSt},
    {Intrinsic::Mvout, "mvout", 4, 4, true, kMove},
    {Intrinsic::Fence, "fence", 0, 0, true, {}},
    {Intrinsic::NegateMatrix, "negate_matrix", 4, 4, true, kNegate},
    {Intrinsic::AddMatrix, "add_matrix", 5, 5, true, kAdd},
    {Intrinsic::FsmConfigEx, "gemmini_extended_config_ex", 6, 6, false, {}},
    {Intrinsic::FsmConfigLd, "gemmini_extended3_config_ld", 4, 4, false, {}},
    {Intrinsic::FsmConfigSt, "gemmini_extended_config_st", 3, 3, false, {}},
    {Intrinsic::FsmLoopWs, "gemmini_loop_ws", 23, 23, false, {}},
    {Intrinsic::FsmFence, "gemmini_fence", 0, 0, false, {}},
}};

}  // namespace

std::optional<IntrinsicInfo> lookup_intrinsic(std::string_view name) {
  for (const auto& info : kTable) {
    if (info.name == name) return info;
  }
  return std::nullopt;
}

const IntrinsicInfo& intrinsic_info(Intrinsic id) {
  return kTable[static_cast<std::size_t>(id)];
}

std::optional<long long> builtin_constant(std::string_view name) {
  // Dataflow and activation encodings follow the Gemmini software headers.
  if (name == "OUTPUT_STATIONARY") return 0;
  if (name == "WEIGHT_STATIONARY") return 1;
  if (name == "NO_ACTIVATION") return 0;
  if (name == "RELU") return 1;
  if (name == "LAYERNORM") return 2;
  if (name == "IGELU") return 3;
  if (name == "SOFTMAX") return 4;
  if (name == "true") return 1;
  if (name == "false") return 0;
  if (name == "NULL") return 0;
  return std::nullopt;
}

}  // namespace tensopt::dsl
