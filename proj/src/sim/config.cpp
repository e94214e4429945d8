#include "tensopt/sim/config.hpp"

#include <fmt/format.h>

namespace tensopt::sim {

std::uint32_t AcceleratorConfig::spad_rows() const {
  return static_cast<std::uint32_t>(spad_kb * 1024 / (dim * byte_size(scalar_of(elem_type))));
}

std::uint32_t AcceleratorConfig::acc_rows() const {
  return static_cast<std::uint32_t>(acc_kb * 1024 / (dim * byte_size(scalar_of(acc_type))));
}

std::string AcceleratorConfig::check() const {
  if (dim <= 0) return "dim must be positive";
  if (spad_kb <= 0 || acc_kb <= 0) return "capacities must be positive";
  if ((spad_kb * 1024) % (dim * byte_size(scalar_of(elem_type))) != 0) {
    return "scratchpad capacity is not a whole number of rows";
  }
  if ((acc_kb * 1024) % (dim * byte_size(scalar_of(acc_type))) != 0) {
    return "accumulator capacity is not a whole number of rows";
  }
  if (spad_rows() > (1u << 29) || acc_rows() > (1u << 29)) return "too many rows for 29-bit addresses";
  if (is_float(scalar_of(elem_type)) != is_float(scalar_of(acc_type))) {
    return "element and accumulator types must both be integer or both be float";
  }
  const auto& t = timing;
  for (auto v : {t.cpu_node_cost, t.issue_cost, t.config_cost, t.dma_startup,
                 t.bus_bytes_per_cycle, t.queue_depth, t.fence_drain_overhead,
                 t.reuse_preload_cost}) {
    if (v <= 0) return "timing parameters must be positive";
  }
  if (t.compute_fill < 0) return "compute_fill must be positive (0 selects dim)";
  return {};
}

AcceleratorConfig instance_a() {
  AcceleratorConfig c;
  c.name = "gemmini-16x16-int8";
  c.dim = 16;
  c.elem_type = ElemType::Int8;
  c.acc_type = ElemType::Int32;
  c.spad_kb = 256;
  c.acc_kb = 64;
  return c;
}

AcceleratorConfig instance_b() {
  AcceleratorConfig c;
  c.name = "gemmini-4x4-fp32";
  c.dim = 4;
  c.elem_type = ElemType::Float32;
  c.acc_type = ElemType::Float32;
  c.spad_kb = 256;
  c.acc_kb = 64;
  return c;
}

std::string accelerator_summary(const AcceleratorConfig& cfg) {
  return fmt::format(
      "The accelerator is a {0}x{0} systolic array (DIM = {0}) with {1} inputs and {2} "
      "accumulation, a {3} KB scratchpad ({4} rows) and a {5} KB accumulator ({6} rows).",
      cfg.dim, name_of(cfg.elem_type), name_of(cfg.acc_type), cfg.spad_kb, cfg.spad_rows(),
      cfg.acc_kb, cfg.acc_rows());
}

}  // namespace tensopt::sim
