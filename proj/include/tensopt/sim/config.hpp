#pragma once

#include <cstdint>
#include <string>

#include "tensopt/core/scalar.hpp"

namespace tensopt::sim {

struct TimingParams {
  std::int64_t cpu_node_cost = 1;
  std::int64_t issue_cost = 2;
  std::int64_t config_cost = 2;
  std::int64_t dma_startup = 20;
  std::int64_t bus_bytes_per_cycle = 16;
  std::int64_t compute_fill = 0;  // 0 means "dim"
  std::int64_t queue_depth = 16;
  std::int64_t fence_drain_overhead = 10;
  // Preload that keeps the resident weights (B address 0xffffffff).
  std::int64_t reuse_preload_cost = 1;

  bool operator==(const TimingParams&) const = default;
};

struct AcceleratorConfig {
  std::string name = "custom";
  int dim = 16;
  ElemType elem_type = ElemType::Int8;
  ElemType acc_type = ElemType::Int32;
  int spad_kb = 256;
  int acc_kb = 64;
  TimingParams timing;

  std::uint32_t spad_rows() const;
  std::uint32_t acc_rows() const;
  std::int64_t fill_cycles() const { return timing.compute_fill > 0 ? timing.compute_fill : dim; }

  /// Empty when valid; otherwise a description of the first violated invariant.
  std::string check() const;

  bool operator==(const AcceleratorConfig&) const = default;
};

/// 16x16 int8 inputs / int32 accumulation, 256 KB scratchpad, 64 KB accumulator.
AcceleratorConfig instance_a();
/// 4x4 fp32 / fp32, 256 KB scratchpad, 64 KB accumulator.
AcceleratorConfig instance_b();

/// One-line size/type description used in prompts.
std::string accelerator_summary(const AcceleratorConfig& cfg);

}  // namespace tensopt::sim
