#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tensopt/sim/config.hpp"

namespace tensopt::sim {

struct PerfReport {
  std::int64_t total_cycles = 0;
  std::int64_t cpu_cycles = 0;
  std::int64_t nodes_evaluated = 0;
  double spad_util_kb = 0.0;
  double acc_util_kb = 0.0;
  std::int64_t dram_bytes_in = 0;
  std::int64_t dram_bytes_out = 0;
  std::map<std::string, std::int64_t> counts;        // per instruction kind
  std::map<std::string, std::int64_t> stall_cycles;  // front-end waiting on each queue
  std::map<std::string, std::int64_t> busy_cycles;   // service time per controller

  bool operator==(const PerfReport&) const = default;
};

/// `Latency: <n> cycles. Scratchpad utilization: <x> KB / <cap> KB. ...`
std::string compute_feedback(const PerfReport& r, const AcceleratorConfig& cfg);

nlohmann::json to_json(const PerfReport& r);
PerfReport perf_from_json(const nlohmann::json& j);

/// One contiguous (or strided) range of rows or DRAM chunks touched by an
/// instruction. `mem` is "spad", "acc", or "dram:<array>" (64-byte chunks).
struct RowRange {
  std::string mem;
  std::int64_t first = 0;
  std::int64_t count = 0;
  std::int64_t stride = 1;
  bool write = false;

  bool operator==(const RowRange&) const = default;
};

struct Event {
  std::string instr;
  std::string controller;  // load | execute | store | cpu
  std::int64_t dispatch_cycle = 0;
  std::int64_t start_cycle = 0;
  std::int64_t end_cycle = 0;
  std::vector<RowRange> rows;

  bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

/// Replays an event log (in dispatch order) and reports every pair of
/// conflicting accesses whose execution windows overlap or are reordered.
std::vector<std::string> check_trace(const std::vector<Event>& events);

}  // namespace tensopt::sim
