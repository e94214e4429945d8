#include "machine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tensopt::sim::detail {
namespace {

constexpr int kLoad = 0, kExecute = 1, kStore = 2;
constexpr std::int64_t kChunk = 64;  // DRAM hazard granularity in bytes

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// out = A * B^T for row-major A and row-major B^T; D = 0 means use `d`.
template <int D>
void matmul_u32(const std::uint32_t* a, const std::uint32_t* bt, std::uint32_t* out, std::size_t d) {
  const std::size_t n = D > 0 ? D : d;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::uint32_t s = 0;
      for (std::size_t k = 0; k < n; ++k) s += a[r * n + k] * bt[c * n + k];
      out[r * n + c] = s;
    }
  }
}

const char* space_name(Space s) { return s == Space::Scratchpad ? "scratchpad" : "accumulator"; }

}  // namespace

Machine::Machine(const Compiled& prog, const RunOptions& opts, std::int64_t* nodes)
    : prog_(prog), cfg_(prog.cfg), opts_(opts), nodes_(nodes), dim_(prog.cfg.dim) {
  elem_ = scalar_of(cfg_.elem_type);
  acc_ = scalar_of(cfg_.acc_type);
  float_path_ = is_float(elem_);
  for (const auto& a : prog.arrays) arrays.emplace_back(a.type, a.shape);
  dma_read_.resize(arrays.size());
  dma_written_.resize(arrays.size());

  const std::size_t spad_n = std::size_t{cfg_.spad_rows()} * dim_;
  const std::size_t acc_n = std::size_t{cfg_.acc_rows()} * dim_;
  std::uint64_t s = opts.garbage_seed ^ 0x5eed5eed5eedull;
  if (float_path_) {
    spad_f_.resize(spad_n);
    acc_f_.resize(acc_n);
    // Garbage is finite and large enough to be noticed by any comparison.
    for (auto& v : spad_f_) v = static_cast<float>(static_cast<std::int64_t>(splitmix(s) % 20001) - 10000) / 64.0f;
    for (auto& v : acc_f_) v = static_cast<float>(static_cast<std::int64_t>(splitmix(s) % 20001) - 10000) / 64.0f;
  } else {
    spad_i_.resize(spad_n);
    acc_i_.resize(acc_n);
    for (auto& v : spad_i_) v = static_cast<std::int32_t>(wrap_int(static_cast<std::int64_t>(splitmix(s)), elem_));
    for (auto& v : acc_i_) v = static_cast<std::int32_t>(wrap_int(static_cast<std::int64_t>(splitmix(s)), acc_));
  }
  spad_written_.assign(cfg_.spad_rows(), 0);
  acc_written_.assign(cfg_.acc_rows(), 0);
  b_i_.assign(std::size_t(dim_) * dim_, 0);
  b_f_.assign(std::size_t(dim_) * dim_, 0.0f);

  ctl_[kLoad].name = "load";
  ctl_[kExecute].name = "execute";
  ctl_[kStore].name = "store";
  if (opts_.timed) {
    spad_wend_.assign(cfg_.spad_rows(), 0);
    spad_rend_.assign(cfg_.spad_rows(), 0);
    acc_wend_.assign(cfg_.acc_rows(), 0);
    acc_rend_.assign(cfg_.acc_rows(), 0);
    dram_wend_.resize(arrays.size());
    dram_rend_.resize(arrays.size());
  }
}

// ---------------------------------------------------------------- CPU side

Val Machine::cpu_load(std::int32_t array, std::size_t index) const {
  const auto& w = dma_written_[array];
  if (!w.empty() && w[index] == epoch_) {
    throw SimError{fmt::format(
        "CPU read of {}[{}] races with an mvout issued since the last fence",
        prog_.arrays[array].name, index)};
  }
  const Tensor& t = arrays[array];
  const std::uint8_t* p = t.bytes.data() + index * t.elem_bytes();
  Val v;
  if (is_float(t.type)) {
    v.f = load_scalar(p, t.type);
  } else {
    v.i = load_int(p, t.type);
  }
  return v;
}

void Machine::check_cpu_write(std::int32_t array, std::size_t index) const {
  const auto& w = dma_written_[array];
  const auto& r = dma_read_[array];
  if ((!w.empty() && w[index] == epoch_) || (!r.empty() && r[index] == epoch_)) {
    throw SimError{fmt::format(
        "CPU write to {}[{}] races with a DMA transfer issued since the last fence",
        prog_.arrays[array].name, index)};
  }
}

void Machine::cpu_store(std::int32_t array, std::size_t index, Val v, ScalarType from) {
  check_cpu_write(array, index);
  Tensor& t = arrays[array];
  Val c = convert(v, from, t.type);
  std::uint8_t* p = t.bytes.data() + index * t.elem_bytes();
  if (is_float(t.type)) {
    store_scalar(p, t.type, c.f);
  } else {
    store_int(p, t.type, c.i);
  }
}

void Machine::init_array(std::int32_t array, const std::vector<Val>& list, ScalarType from) {
  Tensor& t = arrays[array];
  for (std::size_t i = 0; i < t.size(); ++i) check_cpu_write(array, i);
  std::fill(t.bytes.begin(), t.bytes.end(), 0);
  for (std::size_t i = 0; i < list.size(); ++i) cpu_store(array, i, list[i], from);
}

void Machine::mark_dma(std::int32_t array, std::size_t first_elem, std::size_t n, bool write) {
  auto& v = write ? dma_written_[array] : dma_read_[array];
  if (v.empty()) v.assign(arrays[array].size(), 0);
  std::fill(v.begin() + first_elem, v.begin() + first_elem + n, epoch_);
}

void Machine::negate_matrix(const DramPtr& src, const DramPtr& dst, std::int64_t rows,
                            std::int64_t cols) {
  if (src.zero || dst.zero) throw SimError{"negate_matrix: arguments must be arrays"};
  if (rows < 0 || cols < 0) throw SimError{"negate_matrix: negative size"};
  const std::int64_t n = rows * cols;
  dram_byte(src, 0, n * arrays[src.array].elem_bytes(), "negate_matrix");
  dram_byte(dst, 0, n * arrays[dst.array].elem_bytes(), "negate_matrix");
  ScalarType st = arrays[src.array].type;
  for (std::int64_t i = 0; i < n; ++i) {
    Val v = cpu_load(src.array, src.offset + i);
    ScalarType t = is_float(st) ? ScalarType::F64 : ScalarType::I64;
    Val r = apply_unary(XOp::Neg, convert(v, st, t), t);
    cpu_store(dst.array, dst.offset + i, r, t);
  }
  *nodes_ += 3 * n;
}

void Machine::add_matrix(const DramPtr& a, const DramPtr& b, const DramPtr& dst,
                         std::int64_t rows, std::int64_t cols) {
  if (a.zero || b.zero || dst.zero) throw SimError{"add_matrix: arguments must be arrays"};
  if (rows < 0 || cols < 0) throw SimError{"add_matrix: negative size"};
  const std::int64_t n = rows * cols;
  for (const DramPtr* p : {&a, &b, &dst}) {
    dram_byte(*p, 0, n * arrays[p->array].elem_bytes(), "add_matrix");
  }
  ScalarType ta = arrays[a.array].type, tb = arrays[b.array].type;
  ScalarType t = is_float(ta) || is_float(tb) ? ScalarType::F64 : ScalarType::I64;
  for (std::int64_t i = 0; i < n; ++i) {
    Val x = convert(cpu_load(a.array, a.offset + i), ta, t);
    Val y = convert(cpu_load(b.array, b.offset + i), tb, t);
    cpu_store(dst.array, dst.offset + i, apply_binary(XOp::Add, x, y, t), t);
  }
  *nodes_ += 3 * n;
}

// ---------------------------------------------------------------- helpers

std::uint32_t Machine::check_row(const LocalAddress& a, std::int64_t row, const char* instr) const {
  std::int64_t cap = a.space == Space::Scratchpad ? cfg_.spad_rows() : cfg_.acc_rows();
  if (row < 0 || row >= cap) {
    throw SimError{fmt::format("{}: {} row {} out of range (0..{})", instr, space_name(a.space),
                               row, cap - 1)};
  }
  return static_cast<std::uint32_t>(row);
}

void Machine::mark_written(Space s, std::uint32_t row) {
  auto& w = s == Space::Scratchpad ? spad_written_ : acc_written_;
  if (!w[row]) {
    w[row] = 1;
    ++(s == Space::Scratchpad ? spad_written_rows_ : acc_written_rows_);
  }
}

std::int64_t Machine::dram_byte(const DramPtr& p, std::int64_t extra_bytes, std::int64_t len,
                                const char* instr) const {
  const Tensor& t = arrays[p.array];
  const auto esz = static_cast<std::int64_t>(t.elem_bytes());
  std::int64_t begin = p.offset * esz + extra_bytes;
  auto total = static_cast<std::int64_t>(t.bytes.size());
  if (begin < 0 || begin + len > total) {
    throw SimError{fmt::format("{}: DRAM access outside '{}' (bytes [{}, {}) of {})", instr,
                               prog_.arrays[p.array].name, begin, begin + len, total)};
  }
  if (begin % esz != 0) {
    throw SimError{fmt::format("{}: DRAM address into '{}' is not element aligned", instr,
                               prog_.arrays[p.array].name)};
  }
  return begin;
}

// ---------------------------------------------------------------- timing

std::int64_t Machine::cpu_now() const {
  return *nodes_ * cfg_.timing.cpu_node_cost + cpu_extra_;
}

void Machine::touch(Mem m, std::int64_t first, std::int64_t count, std::int64_t stride,
                    bool write, std::int32_t array) {
  if (!opts_.timed || count <= 0) return;
  if (m == Dram && !touches_.empty()) {
    Touch& p = touches_.back();
    if (p.mem == Dram && p.array == array && p.write == write && first >= p.first &&
        first <= p.first + p.count) {
      p.count = std::max(p.count, first + count - p.first);
      return;
    }
  }
  touches_.push_back({m, array, first, count, stride, write});
}

void Machine::touch_dram(std::int32_t array, std::int64_t byte_begin, std::int64_t byte_end,
                         bool write) {
  if (byte_end <= byte_begin) return;
  std::int64_t c0 = byte_begin / kChunk;
  std::int64_t c1 = (byte_end - 1) / kChunk;
  touch(Dram, c0, c1 - c0 + 1, 1, write, array);
}

void Machine::issue(int controller, const char* instr, std::int64_t service) {
  ++counts[instr];
  if (!opts_.timed) {
    touches_.clear();
    return;
  }
  const auto& tp = cfg_.timing;
  Controller& c = ctl_[controller];
  const std::int64_t now = cpu_now();
  while (!c.ends.empty() && c.ends.front() <= now) c.ends.pop_front();
  std::int64_t dispatch = now;
  if (static_cast<std::int64_t>(c.ends.size()) >= tp.queue_depth) {
    dispatch = c.ends.front();
    while (!c.ends.empty() && c.ends.front() <= dispatch) c.ends.pop_front();
  }
  c.stall += dispatch - now;
  cpu_extra_ += dispatch - now + tp.issue_cost;

  std::int64_t ready = std::max(dispatch + tp.issue_cost, c.last_end);
  auto ends_of = [&](const Touch& t) -> std::pair<std::vector<std::int64_t>*, std::vector<std::int64_t>*> {
    switch (t.mem) {
      case Spad: return {&spad_wend_, &spad_rend_};
      case Acc: return {&acc_wend_, &acc_rend_};
      case Dram: {
        auto& w = dram_wend_[t.array];
        auto& r = dram_rend_[t.array];
        if (w.empty()) {
          auto chunks = static_cast<std::size_t>(ceil_div(
              static_cast<std::int64_t>(arrays[t.array].bytes.size()), kChunk));
          w.assign(chunks, 0);
          r.assign(chunks, 0);
        }
        return {&w, &r};
      }
    }
    return {nullptr, nullptr};
  };
  for (const Touch& t : touches_) {
    auto [w, r] = ends_of(t);
    for (std::int64_t k = 0; k < t.count; ++k) {
      auto u = static_cast<std::size_t>(t.first + k * t.stride);
      ready = std::max(ready, (*w)[u]);
      if (t.write) ready = std::max(ready, (*r)[u]);
    }
  }
  const std::int64_t start = ready;
  const std::int64_t end = start + service;
  for (const Touch& t : touches_) {
    auto [w, r] = ends_of(t);
    auto& v = t.write ? *w : *r;
    for (std::int64_t k = 0; k < t.count; ++k) {
      auto u = static_cast<std::size_t>(t.first + k * t.stride);
      v[u] = std::max(v[u], end);
    }
  }
  c.ends.push_back(end);
  c.last_end = end;
  c.busy += service;

  if (opts_.record_events) {
    Event e;
    e.instr = instr;
    e.controller = c.name;
    e.dispatch_cycle = dispatch;
    e.start_cycle = start;
    e.end_cycle = end;
    for (const Touch& t : touches_) {
      std::string mem = t.mem == Spad   ? "spad"
                        : t.mem == Acc ? "acc"
                                       : "dram:" + prog_.arrays[t.array].name;
      e.rows.push_back({std::move(mem), t.first, t.count, t.stride, t.write});
    }
    events.push_back(std::move(e));
  }
  touches_.clear();
}

void Machine::fence() {
  ++counts["fence"];
  ++epoch_;
  if (!opts_.timed) return;
  const std::int64_t now = cpu_now();
  std::int64_t drain = now;
  for (auto& c : ctl_) {
    drain = std::max(drain, c.last_end);
    c.ends.clear();
  }
  const std::int64_t overhead = cfg_.timing.fence_drain_overhead;
  cpu_extra_ += drain - now + overhead;
  if (opts_.record_events) {
    events.push_back({"fence", "cpu", now, drain, drain + overhead, {}});
  }
}

PerfReport Machine::finish() {
  PerfReport r;
  r.cpu_cycles = cpu_now();
  r.total_cycles = r.cpu_cycles;
  for (const auto& c : ctl_) {
    r.total_cycles = std::max(r.total_cycles, c.last_end);
    r.stall_cycles[c.name] = c.stall;
    r.busy_cycles[c.name] = c.busy;
  }
  r.nodes_evaluated = *nodes_;
  r.spad_util_kb = static_cast<double>(spad_written_rows_) * dim_ * byte_size(elem_) / 1024.0;
  r.acc_util_kb = static_cast<double>(acc_written_rows_) * dim_ * byte_size(acc_) / 1024.0;
  r.dram_bytes_in = bytes_in_;
  r.dram_bytes_out = bytes_out_;
  r.counts = counts;
  return r;
}

// ---------------------------------------------------------------- configuration

void Machine::config_ex(std::int64_t dataflow, std::int64_t act, std::int64_t a_stride, bool a_t,
                        bool b_t) {
  if (dataflow != 1) {
    throw SimError{"config_ex: unsupported feature: only WEIGHT_STATIONARY dataflow is modeled"};
  }
  if (act != 0) throw SimError{"config_ex: unsupported feature: only NO_ACTIVATION is modeled"};
  if (a_t || b_t) throw SimError{"config_ex: unsupported feature: A/B transpose"};
  if (a_stride < 1) throw SimError{fmt::format("config_ex: A_stride must be >= 1, got {}", a_stride)};
  ex_set_ = true;
  a_stride_ = a_stride;
  issue(kExecute, "config_ex", cfg_.timing.config_cost);
}

void Machine::config_ld(std::int64_t stride, double scale, std::int64_t block_stride,
                        std::int64_t id) {
  if (id < 0 || id > 2) throw SimError{fmt::format("config_ld: id must be 0, 1 or 2, got {}", id)};
  if (stride < 0 || block_stride < 0) throw SimError{"config_ld: strides must be non-negative"};
  ld_[id] = {true, stride, scale, block_stride};
  issue(kLoad, "config_ld", cfg_.timing.config_cost);
}

void Machine::config_st(std::int64_t stride, double scale) {
  if (stride < 0) throw SimError{"config_st: stride must be non-negative"};
  st_set_ = true;
  st_stride_ = stride;
  st_scale_ = scale;
  issue(kStore, "config_st", cfg_.timing.config_cost);
}

// ---------------------------------------------------------------- data movement

void Machine::mvin(int channel, const DramPtr& src, std::uint32_t local, std::int64_t cols,
                   std::int64_t rows) {
  static const char* kNames[] = {"mvin", "mvin2", "mvin3"};
  const char* name = kNames[channel];
  const LoadCfg& ld = ld_[channel];
  if (!ld.set) {
    throw SimError{fmt::format("{} used before config_ld(..., {})", name, channel)};
  }
  if (rows < 1 || cols < 1) throw SimError{fmt::format("{}: rows and cols must be positive", name)};
  if (rows > dim_) throw SimError{fmt::format("{}: rows = {} exceeds DIM = {}", name, rows, dim_)};
  if (cols > 4 * dim_) {
    throw SimError{fmt::format("{}: cols = {} exceeds 4 * DIM = {}", name, cols, 4 * dim_)};
  }
  LocalAddress dst = decode_local_address(local, Access::Write);
  const bool to_acc = dst.space == Space::Accumulator;
  if (to_acc && cols > dim_) {
    throw SimError{fmt::format("{}: accumulator destination with cols = {} > DIM", name, cols)};
  }
  if (src.zero && cols > dim_) {
    throw SimError{fmt::format("{}: zero-fill is limited to DIM x DIM", name)};
  }
  const ScalarType dst_t = to_acc ? acc_ : elem_;
  const ScalarType src_t = src.zero ? dst_t : arrays[src.array].type;
  const auto esz = static_cast<std::int64_t>(byte_size(src_t));
  const std::int64_t blocks = ceil_div(cols, dim_);
  std::vector<std::int64_t> row_base(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    row_base[r] = src.zero ? 0 : dram_byte(src, r * ld.stride, cols * esz, name);
  }
  for (std::int64_t b = 0; b < blocks; ++b) {
    for (std::int64_t r = 0; r < rows; ++r) {
      check_row(dst, std::int64_t{dst.row} + b * ld.block_stride + r, name);
    }
  }

  const std::uint8_t* base = src.zero ? nullptr : arrays[src.array].bytes.data();
  const bool plain = ld.scale == 1.0 && !is_float(src_t);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      std::uint32_t row = dst.row + static_cast<std::uint32_t>((c / dim_) * ld.block_stride + r);
      std::size_t idx = std::size_t{row} * dim_ + static_cast<std::size_t>(c % dim_);
      const std::uint8_t* p = src.zero ? nullptr : base + row_base[r] + c * esz;
      if (float_path_) {
        float v = src.zero ? 0.0f : static_cast<float>(load_scalar(p, src_t) * ld.scale);
        if (to_acc) {
          acc_f_[idx] = dst.accumulate ? acc_f_[idx] + v : v;
        } else {
          spad_f_[idx] = v;
        }
      } else {
        std::int64_t v = 0;
        if (!src.zero) {
          v = plain ? saturate_int(load_int(p, src_t), dst_t)
                    : round_saturate(load_scalar(p, src_t) * ld.scale, dst_t);
        }
        if (to_acc) {
          acc_i_[idx] = static_cast<std::int32_t>(
              dst.accumulate ? wrap_int(std::int64_t{acc_i_[idx]} + v, acc_) : v);
        } else {
          spad_i_[idx] = static_cast<std::int32_t>(v);
        }
      }
    }
  }
  for (std::int64_t b = 0; b < blocks; ++b) {
    for (std::int64_t r = 0; r < rows; ++r) {
      mark_written(dst.space, dst.row + static_cast<std::uint32_t>(b * ld.block_stride + r));
    }
    touch(to_acc ? Acc : Spad, std::int64_t{dst.row} + b * ld.block_stride, rows, 1, true);
  }
  if (!src.zero) {
    for (std::int64_t r = 0; r < rows; ++r) {
      mark_dma(src.array, static_cast<std::size_t>(row_base[r] / esz),
               static_cast<std::size_t>(cols), false);
      touch_dram(src.array, row_base[r], row_base[r] + cols * esz, false);
    }
    bytes_in_ += rows * cols * esz;
  }
  const auto& tp = cfg_.timing;
  std::int64_t service =
      tp.dma_startup + rows * std::max<std::int64_t>(1, ceil_div(cols * esz, tp.bus_bytes_per_cycle));
  issue(kLoad, name, service);
}

void Machine::mvout(const DramPtr& dst, std::uint32_t local, std::int64_t cols, std::int64_t rows) {
  if (!st_set_) throw SimError{"mvout used before config_st"};
  if (dst.zero) throw SimError{"mvout: DRAM address must reference an array"};
  if (rows < 1 || cols < 1) throw SimError{"mvout: rows and cols must be positive"};
  if (rows > dim_) throw SimError{fmt::format("mvout: rows = {} exceeds DIM = {}", rows, dim_)};
  if (cols > dim_) throw SimError{fmt::format("mvout: cols = {} exceeds DIM = {}", cols, dim_)};
  LocalAddress src = decode_local_address(local, Access::Read);
  const bool from_acc = src.space == Space::Accumulator;
  for (std::int64_t r = 0; r < rows; ++r) check_row(src, std::int64_t{src.row} + r, "mvout");
  Tensor& out = arrays[dst.array];
  const ScalarType out_t = out.type;
  const auto esz = static_cast<std::int64_t>(byte_size(out_t));
  std::vector<std::int64_t> row_base(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    row_base[r] = dram_byte(dst, r * st_stride_, cols * esz, "mvout");
  }
  // DMA writes the DRAM array, so pending CPU-side conflicts are only
  // checked when the CPU touches it later.
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      std::size_t idx = std::size_t{src.row + static_cast<std::uint32_t>(r)} * dim_ + c;
      std::uint8_t* p = out.bytes.data() + row_base[r] + c * esz;
      if (float_path_) {
        double v = from_acc ? acc_f_[idx] : spad_f_[idx];
        if (from_acc && !src.full_width_read) v = static_cast<float>(v * st_scale_);
        if (is_float(out_t)) {
          store_scalar(p, out_t, v);
        } else {
          store_int(p, out_t, round_saturate(v, out_t));
        }
      } else {
        std::int64_t v = from_acc ? acc_i_[idx] : spad_i_[idx];
        if (from_acc && !src.full_width_read) {
          v = st_scale_ == 1.0 ? saturate_int(v, elem_)
                               : round_saturate(static_cast<double>(v) * st_scale_, elem_);
        }
        if (is_float(out_t)) {
          store_scalar(p, out_t, static_cast<double>(v));
        } else {
          store_int(p, out_t, saturate_int(v, out_t));
        }
      }
    }
  }
  touch(from_acc ? Acc : Spad, src.row, rows, 1, false);
  for (std::int64_t r = 0; r < rows; ++r) {
    mark_dma(dst.array, static_cast<std::size_t>(row_base[r] / esz), static_cast<std::size_t>(cols),
             true);
    touch_dram(dst.array, row_base[r], row_base[r] + cols * esz, true);
  }
  bytes_out_ += rows * cols * esz;
  const auto& tp = cfg_.timing;
  std::int64_t service =
      tp.dma_startup + rows * std::max<std::int64_t>(1, ceil_div(cols * esz, tp.bus_bytes_per_cycle));
  issue(kStore, "mvout", service);
}

// ---------------------------------------------------------------- execute

void Machine::preload(std::uint32_t b, std::uint32_t c, std::int64_t b_cols, std::int64_t b_rows,
                      std::int64_t c_cols, std::int64_t c_rows) {
  for (auto v : {b_cols, b_rows, c_cols, c_rows}) {
    if (v < 1 || v > dim_) {
      throw SimError{fmt::format("preload: tile dimensions must be in 1..{} (got {}, {}, {}, {})",
                                 dim_, b_cols, b_rows, c_cols, c_rows)};
    }
  }
  if (!ex_set_) throw SimError{"preload used before config_ex"};
  const bool reuse = b == kNoAddress;
  if (reuse) {
    if (!have_b_) throw SimError{"preload: B_spad_addr = 0xffffffff with no earlier preload"};
  } else {
    LocalAddress ba = decode_local_address(b, Access::Read);
    if (ba.space != Space::Scratchpad) throw SimError{"preload: B must be in the scratchpad"};
    for (std::int64_t r = 0; r < b_rows; ++r) check_row(ba, std::int64_t{ba.row} + r, "preload");
    // Stored transposed (column-major) for the compute inner loop.
    for (int k = 0; k < dim_; ++k) {
      for (int col = 0; col < dim_; ++col) {
        bool in = k < b_rows && col < b_cols;
        std::size_t src = std::size_t{ba.row + static_cast<std::uint32_t>(k)} * dim_ + col;
        std::size_t dst = std::size_t(col) * dim_ + k;
        if (float_path_) {
          b_f_[dst] = in ? spad_f_[src] : 0.0f;
        } else {
          b_i_[dst] = in ? spad_i_[src] : 0;
        }
      }
    }
    have_b_ = true;
    touch(Spad, ba.row, b_rows, 1, false);
  }
  desc_ = {};
  desc_.valid = true;
  desc_.cols = c_cols;
  desc_.rows = c_rows;
  if (c == kNoAddress) {
    desc_.discard = true;
  } else {
    LocalAddress ca = decode_local_address(c, Access::Write);
    if (ca.space != Space::Accumulator) {
      throw SimError{"preload: unsupported feature: C must be an accumulator address"};
    }
    for (std::int64_t r = 0; r < c_rows; ++r) check_row(ca, std::int64_t{ca.row} + r, "preload");
    desc_.row = ca.row;
    desc_.accumulate = ca.accumulate;
  }
  issue(kExecute, "preload", reuse ? cfg_.timing.reuse_preload_cost : cfg_.fill_cycles());
}

void Machine::compute(bool accumulated, std::uint32_t a, std::uint32_t bias, std::int64_t a_cols,
                      std::int64_t a_rows, std::int64_t bias_cols, std::int64_t bias_rows) {
  const char* name = accumulated ? "compute_accumulated" : "compute_preloaded";
  for (auto v : {a_cols, a_rows, bias_cols, bias_rows}) {
    if (v < 1 || v > dim_) {
      throw SimError{fmt::format("{}: tile dimensions must be in 1..{} (got {}, {}, {}, {})", name,
                                 dim_, a_cols, a_rows, bias_cols, bias_rows)};
    }
  }
  if (!desc_.valid) throw SimError{fmt::format("{} without a preceding preload", name)};
  LocalAddress aa = decode_local_address(a, Access::Read);
  if (aa.space != Space::Scratchpad) throw SimError{fmt::format("{}: A must be in the scratchpad", name)};
  for (std::int64_t r = 0; r < a_rows; ++r) check_row(aa, std::int64_t{aa.row} + r * a_stride_, name);
  const bool has_bias = bias != kNoAddress;
  LocalAddress ba;
  if (has_bias) {
    ba = decode_local_address(bias, Access::Read);
    if (ba.space != Space::Scratchpad) {
      throw SimError{fmt::format("{}: bias must be in the scratchpad", name)};
    }
    for (std::int64_t r = 0; r < bias_rows; ++r) check_row(ba, std::int64_t{ba.row} + r, name);
  }

  const std::size_t d = static_cast<std::size_t>(dim_);
  if (!desc_.discard) {
    if (float_path_) {
      std::vector<float> at(d * d, 0.0f);
      for (std::int64_t r = 0; r < a_rows; ++r) {
        const float* row = &spad_f_[(aa.row + r * a_stride_) * d];
        std::copy(row, row + a_cols, &at[r * d]);
      }
      for (std::int64_t r = 0; r < desc_.rows; ++r) {
        for (std::int64_t c = 0; c < desc_.cols; ++c) {
          const float* arow = &at[r * d];
          const float* bcol = &b_f_[c * d];
          float s = 0.0f;
          for (std::size_t k = 0; k < d; ++k) s += arow[k] * bcol[k];
          if (has_bias && r < bias_rows && c < bias_cols) s += spad_f_[(ba.row + r) * d + c];
          float& out = acc_f_[(desc_.row + r) * d + c];
          out = desc_.accumulate ? out + s : s;
        }
      }
    } else {
      // Modular uint32 arithmetic gives exactly the wrapped int32 result.
      std::vector<std::uint32_t> at(d * d, 0), prod(d * d);
      for (std::int64_t r = 0; r < a_rows; ++r) {
        const std::int32_t* row = &spad_i_[(aa.row + r * a_stride_) * d];
        std::copy(row, row + a_cols, &at[r * d]);
      }
      const auto* bt = reinterpret_cast<const std::uint32_t*>(b_i_.data());
      if (d == 16) {
        matmul_u32<16>(at.data(), bt, prod.data(), d);
      } else if (d == 4) {
        matmul_u32<4>(at.data(), bt, prod.data(), d);
      } else {
        matmul_u32<0>(at.data(), bt, prod.data(), d);
      }
      for (std::int64_t r = 0; r < desc_.rows; ++r) {
        for (std::int64_t c = 0; c < desc_.cols; ++c) {
          std::uint32_t s = prod[r * d + c];
          if (has_bias && r < bias_rows && c < bias_cols) {
            s += static_cast<std::uint32_t>(spad_i_[(ba.row + r) * d + c]);
          }
          std::int32_t& out = acc_i_[(desc_.row + r) * d + c];
          std::int64_t v = wrap_int(static_cast<std::int32_t>(s), acc_);
          out = static_cast<std::int32_t>(desc_.accumulate ? wrap_int(out + v, acc_) : v);
        }
      }
    }
    for (std::int64_t r = 0; r < desc_.rows; ++r) {
      mark_written(Space::Accumulator, desc_.row + static_cast<std::uint32_t>(r));
    }
  }
  touch(Spad, aa.row, a_rows, a_stride_, false);
  if (has_bias) touch(Spad, ba.row, bias_rows, 1, false);
  if (!desc_.discard) touch(Acc, desc_.row, desc_.rows, 1, true);
  desc_.valid = false;
  issue(kExecute, name, a_rows);
}

}  // namespace tensopt::sim::detail
