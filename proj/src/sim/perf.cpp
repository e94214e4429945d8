#include "tensopt/sim/perf.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

namespace tensopt::sim {

std::string compute_feedback(const PerfReport& r, const AcceleratorConfig& cfg) {
  return fmt::format(
      "Latency: {} cycles. Scratchpad utilization: {:.1f} KB / {} KB. Accumulator utilization: "
      "{:.1f} KB / {} KB.",
      r.total_cycles, r.spad_util_kb, cfg.spad_kb, r.acc_util_kb, cfg.acc_kb);
}

nlohmann::json to_json(const PerfReport& r) {
  return {
      {"total_cycles", r.total_cycles},
      {"cpu_cycles", r.cpu_cycles},
      {"nodes_evaluated", r.nodes_evaluated},
      {"spad_util_kb", r.spad_util_kb},
      {"acc_util_kb", r.acc_util_kb},
      {"dram_bytes_in", r.dram_bytes_in},
      {"dram_bytes_out", r.dram_bytes_out},
      {"counts", r.counts},
      {"stall_cycles", r.stall_cycles},
      {"busy_cycles", r.busy_cycles},
  };
}

PerfReport perf_from_json(const nlohmann::json& j) {
  PerfReport r;
  r.total_cycles = j.at("total_cycles");
  r.cpu_cycles = j.at("cpu_cycles");
  r.nodes_evaluated = j.value("nodes_evaluated", std::int64_t{0});
  r.spad_util_kb = j.at("spad_util_kb");
  r.acc_util_kb = j.at("acc_util_kb");
  r.dram_bytes_in = j.at("dram_bytes_in");
  r.dram_bytes_out = j.at("dram_bytes_out");
  r.counts = j.at("counts").get<std::map<std::string, std::int64_t>>();
  r.stall_cycles = j.at("stall_cycles").get<std::map<std::string, std::int64_t>>();
  r.busy_cycles = j.value("busy_cycles", std::map<std::string, std::int64_t>{});
  return r;
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : e.rows) {
    nlohmann::json o{{"mem", r.mem}, {"first", r.first}, {"count", r.count}, {"write", r.write}};
    if (r.stride != 1) o["stride"] = r.stride;
    rows.push_back(std::move(o));
  }
  return {{"instr", e.instr},
          {"controller", e.controller},
          {"dispatch_cycle", e.dispatch_cycle},
          {"start_cycle", e.start_cycle},
          {"end_cycle", e.end_cycle},
          {"rows", std::move(rows)}};
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.instr = j.at("instr");
  e.controller = j.at("controller");
  e.dispatch_cycle = j.at("dispatch_cycle");
  e.start_cycle = j.at("start_cycle");
  e.end_cycle = j.at("end_cycle");
  for (const auto& r : j.at("rows")) {
    e.rows.push_back({r.at("mem"), r.at("first"), r.at("count"), r.value("stride", std::int64_t{1}),
                      r.at("write")});
  }
  return e;
}

std::vector<std::string> check_trace(const std::vector<Event>& events) {
  struct Last {
    std::int64_t write_end = 0;
    std::int64_t read_end = 0;
    std::size_t writer = 0;
    std::size_t reader = 0;
  };
  std::unordered_map<std::string, Last> cells;
  std::unordered_map<std::string, std::int64_t> controller_end;
  std::int64_t all_end = 0;
  std::vector<std::string> problems;
  auto report = [&](std::size_t i, const std::string& what) {
    problems.push_back(fmt::format("event {} ({}): {}", i, events[i].instr, what));
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.start_cycle < e.dispatch_cycle || e.end_cycle < e.start_cycle) {
      report(i, "inconsistent dispatch/start/end cycles");
    }
    if (e.controller == "cpu") {
      if (e.instr == "fence" && e.start_cycle < all_end) {
        report(i, fmt::format("fence completes at {} before outstanding work ends at {}",
                              e.start_cycle, all_end));
      }
      continue;
    }
    auto& ctl = controller_end[e.controller];
    if (e.start_cycle < ctl) {
      report(i, fmt::format("starts at {} while the {} controller is busy until {}",
                            e.start_cycle, e.controller, ctl));
    }
    ctl = std::max(ctl, e.end_cycle);
    all_end = std::max(all_end, e.end_cycle);

    for (const auto& r : e.rows) {
      for (std::int64_t k = 0; k < r.count; ++k) {
        std::string key = r.mem + ":" + std::to_string(r.first + k * r.stride);
        Last& c = cells[key];
        if (e.start_cycle < c.write_end) {
          report(i, fmt::format("{} {} overlaps earlier write by event {} (ends {})",
                                r.write ? "write" : "read", key, c.writer, c.write_end));
        }
        if (r.write && e.start_cycle < c.read_end) {
          report(i, fmt::format("write {} overlaps earlier read by event {} (ends {})", key,
                                c.reader, c.read_end));
        }
      }
    }
    for (const auto& r : e.rows) {
      for (std::int64_t k = 0; k < r.count; ++k) {
        Last& c = cells[r.mem + ":" + std::to_string(r.first + k * r.stride)];
        if (r.write) {
          if (e.end_cycle >= c.write_end) {
            c.write_end = e.end_cycle;
            c.writer = i;
          }
        } else if (e.end_cycle >= c.read_end) {
          c.read_end = e.end_cycle;
          c.reader = i;
        }
      }
    }
  }
  return problems;
}

}  // namespace tensopt::sim
