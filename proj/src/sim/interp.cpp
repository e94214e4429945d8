#include <fmt/format.h>

#include "ir.hpp"
#include "machine.hpp"
#include "tensopt/dsl/validate.hpp"

namespace tensopt::sim {
namespace detail {
namespace {

using dsl::Intrinsic;

class Interpreter {
 public:
  Interpreter(const Compiled& prog, const RunOptions& opts)
      : prog_(prog), opts_(opts), m_(prog, opts, &nodes_) {
    slots_.resize(prog.slots.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i].i = 0;
    once_.assign(prog.once_count, 0);
  }

  Machine& machine() { return m_; }
  std::int64_t nodes() const { return nodes_; }

  void run() { exec_all(prog_.body); }

  dsl::SourceLoc loc;  // statement being executed, for error messages

 private:
  std::size_t element_index(std::int32_t array, const std::vector<XNode>& subs) {
    const ArrayInfo& a = prog_.arrays[array];
    std::size_t idx = 0;
    for (std::size_t d = 0; d < a.shape.size(); ++d) {
      std::int64_t s = d < subs.size() ? eval(subs[d]).i : 0;
      if (s < 0 || static_cast<std::size_t>(s) >= a.shape[d]) {
        throw SimError{fmt::format("index {} out of bounds for dimension {} of '{}' (size {})", s,
                                   d, a.name, a.shape[d])};
      }
      idx = idx * a.shape[d] + static_cast<std::size_t>(s);
    }
    return idx;
  }

  Val eval(const XNode& n) {
    nodes_ += n.cost;
    switch (n.op) {
      case XOp::Const: return n.k;
      case XOp::Var: return slots_[n.slot];
      case XOp::Elem: return m_.cpu_load(n.slot, element_index(n.slot, n.kids));
      case XOp::Convert: return convert(eval(n.kids[0]), n.kids[0].type, n.type);
      case XOp::Neg:
      case XOp::BitNot:
      case XOp::LNot: return apply_unary(n.op, eval(n.kids[0]), n.operand);
      case XOp::LAnd: {
        Val v;
        v.i = truthy(eval(n.kids[0]), n.kids[0].type) && truthy(eval(n.kids[1]), n.kids[1].type);
        return v;
      }
      case XOp::LOr: {
        Val v;
        v.i = truthy(eval(n.kids[0]), n.kids[0].type) || truthy(eval(n.kids[1]), n.kids[1].type);
        return v;
      }
      case XOp::Cond:
        return truthy(eval(n.kids[0]), n.kids[0].type) ? eval(n.kids[1]) : eval(n.kids[2]);
      default: {
        Val a = eval(n.kids[0]);
        Val b = eval(n.kids[1]);
        return apply_binary(n.op, a, b, n.operand);
      }
    }
  }

  std::int64_t as_int(const XNode& n) { return convert(eval(n), n.type, ScalarType::I64).i; }
  double as_double(const XNode& n) { return convert(eval(n), n.type, ScalarType::F64).f; }
  std::uint32_t as_addr(const XNode& n) {
    return static_cast<std::uint32_t>(convert(eval(n), n.type, ScalarType::U32).i);
  }

  DramPtr dram(const DramRef& r) {
    DramPtr p;
    if (r.zero) {
      p.zero = true;
      return p;
    }
    p.array = r.array;
    p.offset = static_cast<std::int64_t>(element_index(r.array, r.subs));
    return p;
  }

  void call(const SNode& s) {
    const auto& a = s.args;
    switch (s.intrinsic) {
      case Intrinsic::ConfigEx: {
        std::int64_t df = as_int(a[0]), act = as_int(a[1]), stride = as_int(a[2]);
        bool at = as_int(a[3]) != 0, bt = as_int(a[4]) != 0;
        m_.config_ex(df, act, stride, at, bt);
        return;
      }
      case Intrinsic::ConfigLd: {
        std::int64_t stride = as_int(a[0]);
        double scale = as_double(a[1]);
        std::int64_t bs = as_int(a[2]), id = as_int(a[3]);
        m_.config_ld(stride, scale, bs, id);
        return;
      }
      case Intrinsic::ConfigSt: {
        std::int64_t stride = as_int(a[0]);
        double scale = a.size() > 1 ? as_double(a[1]) : 1.0;
        m_.config_st(stride, scale);
        return;
      }
      case Intrinsic::Mvin:
      case Intrinsic::Mvin2:
      case Intrinsic::Mvin3:
      case Intrinsic::Mvout: {
        nodes_ += a[0].cost;
        DramPtr p = dram(s.drefs[0]);
        std::uint32_t local = as_addr(a[1]);
        std::int64_t cols = as_int(a[2]), rows = as_int(a[3]);
        if (s.intrinsic == Intrinsic::Mvout) {
          m_.mvout(p, local, cols, rows);
        } else {
          int ch = s.intrinsic == Intrinsic::Mvin ? 0 : s.intrinsic == Intrinsic::Mvin2 ? 1 : 2;
          m_.mvin(ch, p, local, cols, rows);
        }
        return;
      }
      case Intrinsic::Preload: {
        std::uint32_t b = as_addr(a[0]), c = as_addr(a[1]);
        std::int64_t v[4];
        for (int i = 0; i < 4; ++i) v[i] = as_int(a[2 + i]);
        m_.preload(b, c, v[0], v[1], v[2], v[3]);
        return;
      }
      case Intrinsic::ComputePreloaded:
      case Intrinsic::ComputeAccumulated: {
        std::uint32_t x = as_addr(a[0]), bias = as_addr(a[1]);
        std::int64_t v[4];
        for (int i = 0; i < 4; ++i) v[i] = as_int(a[2 + i]);
        m_.compute(s.intrinsic == Intrinsic::ComputeAccumulated, x, bias, v[0], v[1], v[2], v[3]);
        return;
      }
      case Intrinsic::Fence: m_.fence(); return;
      case Intrinsic::NegateMatrix: {
        nodes_ += a[0].cost + a[1].cost;
        DramPtr src = dram(s.drefs[0]), dst = dram(s.drefs[1]);
        std::int64_t rows = as_int(a[2]), cols = as_int(a[3]);
        m_.negate_matrix(src, dst, rows, cols);
        return;
      }
      case Intrinsic::AddMatrix: {
        nodes_ += a[0].cost + a[1].cost + a[2].cost;
        DramPtr x = dram(s.drefs[0]), y = dram(s.drefs[1]), dst = dram(s.drefs[2]);
        std::int64_t rows = as_int(a[3]), cols = as_int(a[4]);
        m_.add_matrix(x, y, dst, rows, cols);
        return;
      }
      default: throw SimError{"intrinsic is not executable"};
    }
  }

  void exec_all(const std::vector<SNode>& body) {
    for (const auto& s : body) exec(s);
  }

  bool first_time(std::int32_t once) {
    if (once < 0) return true;
    if (once_[once]) return false;
    once_[once] = 1;
    return true;
  }

  void exec(const SNode& s) {
    loc = s.loc;
    nodes_ += 1;
    if (nodes_ > opts_.node_limit) {
      throw SimError{fmt::format("runaway guard: more than {} nodes evaluated", opts_.node_limit)};
    }
    switch (s.op) {
      case SOp::Block: exec_all(s.body); return;
      case SOp::SetVar:
        if (first_time(s.once)) slots_[s.slot] = eval(s.value);
        return;
      case SOp::SetElem: {
        std::size_t idx = element_index(s.slot, s.subs);
        Val v = eval(s.value);
        m_.cpu_store(s.slot, idx, v, s.value.type);
        return;
      }
      case SOp::InitArray: {
        if (!first_time(s.once)) return;
        std::vector<Val> vals;
        vals.reserve(s.list.size());
        for (const auto& x : s.list) vals.push_back(eval(x));
        m_.init_array(s.slot, vals, prog_.arrays[s.slot].type);
        return;
      }
      case SOp::If:
        if (truthy(eval(s.value), s.value.type)) {
          exec_all(s.body);
        } else {
          exec_all(s.alt);
        }
        return;
      case SOp::For:
        exec(s.alt[0]);
        while (true) {
          loc = s.loc;
          if (!truthy(eval(s.value), s.value.type)) break;
          exec_all(s.body);
          exec(s.alt[1]);
        }
        return;
      case SOp::Call: call(s); return;
    }
  }

  const Compiled& prog_;
  RunOptions opts_;
  std::int64_t nodes_ = 0;
  Machine m_;
  std::vector<Val> slots_;
  std::vector<char> once_;
};

}  // namespace
}  // namespace detail

Program::CompileResult Program::compile(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                                        const dsl::Bindings& bindings) {
  CompileResult r;
  if (auto problem = cfg.check(); !problem.empty()) {
    r.diagnostics.push_back({dsl::Severity::Error, {}, "config", problem});
    return r;
  }
  r.diagnostics = dsl::validate_kernel(p, cfg, bindings);
  if (dsl::has_errors(r.diagnostics)) return r;
  try {
    auto c = std::make_shared<detail::Compiled>(detail::compile_program(p, cfg, bindings));
    Program prog;
    prog.impl_ = std::move(c);
    r.program = std::move(prog);
  } catch (const detail::CompileError& e) {
    r.diagnostics.push_back({dsl::Severity::Error, e.loc, e.code, e.message});
  }
  return r;
}

const std::vector<ParamInfo>& Program::params() const { return impl_->params; }
const AcceleratorConfig& Program::config() const { return impl_->cfg; }

RunResult Program::run(const TensorMap& inputs, const RunOptions& opts) const {
  RunResult out;
  for (const auto& [name, t] : inputs) {
    bool known = false;
    for (const auto& p : impl_->params) known = known || p.name == name;
    if (!known) {
      out.error = fmt::format("input '{}' is not a parameter of the kernel", name);
      return out;
    }
  }
  detail::Interpreter in(*impl_, opts);
  auto& m = in.machine();
  for (std::size_t i = 0; i < impl_->params.size(); ++i) {
    const auto& p = impl_->params[i];
    auto it = inputs.find(p.name);
    if (it == inputs.end()) continue;
    if (it->second.type != p.type || it->second.shape != p.shape) {
      out.error = fmt::format("input '{}' does not match the declared type/shape", p.name);
      return out;
    }
    m.arrays[i] = it->second;
  }
  try {
    in.run();
    out.ok = true;
  } catch (const detail::SimError& e) {
    out.error = fmt::format("{}:{}: {}", in.loc.line, in.loc.column, e.message);
  } catch (const detail::EvalError& e) {
    out.error = fmt::format("{}:{}: {}", in.loc.line, in.loc.column, e.message);
  }
  out.nodes = in.nodes();
  out.counts = m.counts;
  if (out.ok) {
    for (std::size_t i = 0; i < impl_->params.size(); ++i) {
      out.arrays[impl_->params[i].name] = std::move(m.arrays[i]);
    }
    if (opts.timed) out.perf = m.finish();
    out.events = std::move(m.events);
  }
  return out;
}

namespace {

RunResult run_once(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                   const TensorMap& inputs, const dsl::Bindings& bindings, const RunOptions& o) {
  auto c = Program::compile(p, cfg, bindings);
  if (!c.program) {
    RunResult r;
    r.error = dsl::format(c.diagnostics);
    return r;
  }
  return c.program->run(inputs, o);
}

}  // namespace

RunResult run_functional(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                         const TensorMap& inputs, const dsl::Bindings& bindings,
                         std::uint64_t garbage_seed) {
  RunOptions o;
  o.garbage_seed = garbage_seed;
  return run_once(p, cfg, inputs, bindings, o);
}

RunResult run_timed(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                    const TensorMap& inputs, const dsl::Bindings& bindings, bool record_events,
                    std::uint64_t garbage_seed) {
  RunOptions o;
  o.timed = true;
  o.record_events = record_events;
  o.garbage_seed = garbage_seed;
  return run_once(p, cfg, inputs, bindings, o);
}

}  // namespace tensopt::sim
