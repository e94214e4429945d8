// Accelerator state, instruction semantics and the timing model.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "ir.hpp"
#include "tensopt/core/tensor.hpp"
#include "tensopt/sim/address.hpp"
#include "tensopt/sim/perf.hpp"

namespace tensopt::sim::detail {

struct SimError {
  std::string message;
};

struct DramPtr {
  bool zero = false;
  std::int32_t array = -1;
  std::int64_t offset = 0;  // element offset into the array
};

class Machine {
 public:
  // `nodes` is the front-end node counter; CPU helper builtins add to it.
  Machine(const Compiled& prog, const RunOptions& opts, std::int64_t* nodes);

  std::vector<Tensor> arrays;

  Val cpu_load(std::int32_t array, std::size_t index) const;
  void cpu_store(std::int32_t array, std::size_t index, Val v, ScalarType from);
  void init_array(std::int32_t array, const std::vector<Val>& list, ScalarType from);

  void config_ex(std::int64_t dataflow, std::int64_t act, std::int64_t a_stride, bool a_t, bool b_t);
  void config_ld(std::int64_t stride, double scale, std::int64_t block_stride, std::int64_t id);
  void config_st(std::int64_t stride, double scale);
  void mvin(int channel, const DramPtr& src, std::uint32_t local, std::int64_t cols,
            std::int64_t rows);
  void preload(std::uint32_t b, std::uint32_t c, std::int64_t b_cols, std::int64_t b_rows,
               std::int64_t c_cols, std::int64_t c_rows);
  void compute(bool accumulated, std::uint32_t a, std::uint32_t bias, std::int64_t a_cols,
               std::int64_t a_rows, std::int64_t bias_cols, std::int64_t bias_rows);
  void mvout(const DramPtr& dst, std::uint32_t local, std::int64_t cols, std::int64_t rows);
  void fence();
  void negate_matrix(const DramPtr& src, const DramPtr& dst, std::int64_t rows, std::int64_t cols);
  void add_matrix(const DramPtr& a, const DramPtr& b, const DramPtr& dst, std::int64_t rows,
                  std::int64_t cols);

  PerfReport finish();
  std::vector<Event> events;
  std::map<std::string, std::int64_t> counts;

 private:
  enum Mem { Spad, Acc, Dram };
  struct Touch {
    Mem mem;
    std::int32_t array;  // Dram only
    std::int64_t first;
    std::int64_t count;
    std::int64_t stride;
    bool write;
  };
  struct Controller {
    std::string name;
    std::deque<std::int64_t> ends;
    std::int64_t last_end = 0;
    std::int64_t busy = 0;
    std::int64_t stall = 0;
  };
  struct LoadCfg {
    bool set = false;
    std::int64_t stride = 0;
    double scale = 1.0;
    std::int64_t block_stride = 0;
  };
  struct Descriptor {
    bool valid = false;
    bool discard = false;
    bool accumulate = false;
    std::uint32_t row = 0;
    std::int64_t cols = 0;
    std::int64_t rows = 0;
  };

  const Compiled& prog_;
  const AcceleratorConfig& cfg_;
  RunOptions opts_;
  std::int64_t* nodes_;
  int dim_;
  bool float_path_;
  ScalarType elem_;
  ScalarType acc_;

  // Local memories. The int path stores values in int32, the float path in
  // float; elements always hold values representable in elem/acc type.
  std::vector<std::int32_t> spad_i_, acc_i_;
  std::vector<float> spad_f_, acc_f_;
  std::vector<char> spad_written_, acc_written_;
  std::int64_t spad_written_rows_ = 0, acc_written_rows_ = 0;

  std::array<LoadCfg, 3> ld_;
  bool ex_set_ = false;
  std::int64_t a_stride_ = 1;
  bool st_set_ = false;
  std::int64_t st_stride_ = 0;
  double st_scale_ = 1.0;

  bool have_b_ = false;
  std::vector<std::int32_t> b_i_;
  std::vector<float> b_f_;
  Descriptor desc_;

  // CPU/DMA race tracking since the last fence.
  std::uint32_t epoch_ = 1;
  std::vector<std::vector<std::uint32_t>> dma_read_, dma_written_;

  // Timing.
  std::array<Controller, 3> ctl_;
  std::int64_t cpu_extra_ = 0;
  std::vector<std::int64_t> spad_wend_, spad_rend_, acc_wend_, acc_rend_;
  std::vector<std::vector<std::int64_t>> dram_wend_, dram_rend_;
  std::int64_t bytes_in_ = 0, bytes_out_ = 0;
  std::vector<Touch> touches_;

  std::int64_t cpu_now() const;
  void issue(int controller, const char* instr, std::int64_t service);
  void touch(Mem m, std::int64_t first, std::int64_t count, std::int64_t stride, bool write,
             std::int32_t array = -1);
  void touch_dram(std::int32_t array, std::int64_t byte_begin, std::int64_t byte_end, bool write);

  std::uint32_t check_row(const LocalAddress& a, std::int64_t row, const char* instr) const;
  void mark_written(Space s, std::uint32_t row);
  std::int64_t dram_byte(const DramPtr& p, std::int64_t extra_bytes, std::int64_t len,
                         const char* instr) const;
  void mark_dma(std::int32_t array, std::size_t first_elem, std::size_t n, bool write);
  void check_cpu_write(std::int32_t array, std::size_t index) const;
};

}  // namespace tensopt::sim::detail
