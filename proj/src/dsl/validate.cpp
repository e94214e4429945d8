#include "tensopt/dsl/validate.hpp"

#include <fmt/format.h>

#include "tensopt/dsl/intrinsics.hpp"

namespace tensopt::dsl {
namespace {

constexpr std::uint32_t kNoAddress = 0xffffffffu;

std::optional<std::int64_t> fold_binary(BinaryOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case BinaryOp::Mul: return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
    case BinaryOp::Div: if (b == 0) return std::nullopt; return a / b;
    case BinaryOp::Mod: if (b == 0) return std::nullopt; return a % b;
    case BinaryOp::Add: return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
    case BinaryOp::Sub: return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
    case BinaryOp::Shl:
      if (b < 0 || b >= 64) return std::nullopt;
      return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) << b);
    case BinaryOp::Shr:
      if (b < 0 || b >= 64) return std::nullopt;
      return a >> b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::BitAnd: return a & b;
    case BinaryOp::BitXor: return a ^ b;
    case BinaryOp::BitOr: return a | b;
    case BinaryOp::LogicalAnd: return a && b;
    case BinaryOp::LogicalOr: return a || b;
  }
  return std::nullopt;
}

struct Symbol {
  bool is_array = false;
  bool is_const = false;
  ScalarType type = ScalarType::I32;
  std::size_t rank = 0;
  std::optional<std::int64_t> value;  // const scalars with constant initializers
};

class Validator {
 public:
  Validator(const sim::AcceleratorConfig& cfg, const Bindings& bindings)
      : cfg_(cfg), bindings_(bindings) {
    for (const auto& [k, v] : default_bindings(cfg)) bindings_.try_emplace(k, v);
  }

  std::vector<Diagnostic> run(const KernelProgram& p) {
    scopes_.emplace_back();
    for (const auto& a : p.params) {
      auto t = resolve_type(a.type.name, cfg_.elem_type, cfg_.acc_type);
      if (!t || !(*t == ScalarType::I8 || *t == ScalarType::I32 || *t == ScalarType::F32)) {
        error({}, "param-type",
              fmt::format("parameter '{}' must have int8, int32 or float element type", a.name));
      }
      if (a.dims.empty() || a.dims.size() > 3) {
        error({}, "param-shape", fmt::format("parameter '{}' must have 1 to 3 dimensions", a.name));
      }
      check_dims(a.dims, a.name, {});
      declare({}, a.name, Symbol{true, a.type.is_const, t.value_or(ScalarType::I8), a.dims.size(), {}});
    }
    block(p.body, false);
    return std::move(diags_);
  }

 private:
  void error(SourceLoc loc, std::string code, std::string msg) {
    diags_.push_back({Severity::Error, loc, std::move(code), std::move(msg)});
  }

  Bindings constants() const {
    Bindings names = bindings_;
    for (const auto& scope : scopes_) {
      for (const auto& [name, sym] : scope) {
        if (sym.value) names[name] = *sym.value;
      }
    }
    return names;
  }

  std::optional<std::int64_t> fold(const Expr& e) const { return const_eval(e, constants(), cfg_); }

  const Symbol* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void declare(SourceLoc loc, const std::string& name, Symbol sym) {
    auto& scope = scopes_.back();
    if (scope.count(name)) {
      error(loc, "redeclared", fmt::format("'{}' is already declared in this scope", name));
      return;
    }
    if (builtin_constant(name) || lookup_intrinsic(name)) {
      error(loc, "reserved", fmt::format("'{}' is a reserved name", name));
    }
    scope.emplace(name, sym);
  }

  void check_dims(const std::vector<Expr>& dims, const std::string& name, SourceLoc loc) {
    for (const auto& d : dims) {
      auto v = fold(d);
      if (!v) {
        error(d.loc.line ? d.loc : loc, "vla",
              fmt::format("array '{}' must have constant dimensions", name));
      } else if (*v < 1) {
        error(d.loc.line ? d.loc : loc, "array-shape",
              fmt::format("array '{}' has a dimension smaller than 1", name));
      }
    }
  }

  void block(const std::vector<Stmt>& body, bool new_scope) {
    if (new_scope) scopes_.emplace_back();
    for (const auto& s : body) stmt(s);
    if (new_scope) scopes_.pop_back();
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Empty: return;
      case StmtKind::Block: block(s.body, true); return;
      case StmtKind::Decl: decl(s); return;
      case StmtKind::Assign:
        lvalue(s.target, s.loc);
        value(s.value);
        return;
      case StmtKind::IncDec: lvalue(s.target, s.loc); return;
      case StmtKind::Call: call(s); return;
      case StmtKind::If:
        value(s.cond);
        block(s.body, true);
        if (s.has_else) block(s.else_body, true);
        return;
      case StmtKind::For: {
        scopes_.emplace_back();
        const auto& f = s.loop;
        value(f.init);
        if (f.decl_type) {
          auto t = resolve_type(f.decl_type->name, cfg_.elem_type, cfg_.acc_type);
          if (!t || is_float(*t)) {
            error(s.loc, "loop-form", "loop induction variable must have an integer type");
          }
          declare(s.loc, f.var, Symbol{false, false, t.value_or(ScalarType::I64), 0, {}});
        } else {
          const Symbol* sym = lookup(f.var);
          if (!sym) {
            error(s.loc, "undeclared", fmt::format("'{}' is not declared", f.var));
          } else if (sym->is_array || sym->is_const) {
            error(s.loc, "loop-form", fmt::format("'{}' cannot be a loop variable", f.var));
          }
        }
        value(f.cond);
        if (f.step) value(*f.step);
        block(s.body, true);
        scopes_.pop_back();
        return;
      }
    }
  }

  void decl(const Stmt& s) {
    const auto& d = s.decl;
    auto t = resolve_type(d.type.name, cfg_.elem_type, cfg_.acc_type);
    if (!t) error(s.loc, "unknown-type", fmt::format("unknown type '{}'", d.type.name));
    Symbol sym{!d.dims.empty(), d.type.is_const, t.value_or(ScalarType::I32), d.dims.size(), {}};
    if (sym.is_array) {
      check_dims(d.dims, d.name, s.loc);
      if (d.init) error(s.loc, "initializer", "array initializer must be a brace list");
      if (d.list) {
        std::int64_t total = 1;
        for (const auto& e : d.dims) total *= fold(e).value_or(1);
        if (static_cast<std::int64_t>(d.list->size()) > total) {
          error(s.loc, "initializer", fmt::format("too many initializers for '{}'", d.name));
        }
        for (const auto& e : *d.list) value(e);
      }
    } else {
      if (d.list) {
        if (d.list->size() > 1) error(s.loc, "initializer", "scalar brace initializer with several values");
        for (const auto& e : *d.list) value(e);
      }
      if (d.init) {
        value(*d.init);
        if (d.type.is_const) sym.value = fold(*d.init);
      }
    }
    declare(s.loc, d.name, sym);
  }

  void lvalue(const Expr& e, SourceLoc loc) {
    if (e.kind == ExprKind::Identifier) {
      const Symbol* sym = lookup(e.text);
      if (!sym) {
        error(e.loc, "undeclared", fmt::format("'{}' is not declared", e.text));
      } else if (sym->is_array) {
        error(e.loc, "array-assign", fmt::format("cannot assign to array '{}'", e.text));
      } else if (sym->is_const) {
        error(e.loc, "const-assign", fmt::format("cannot assign to const '{}'", e.text));
      }
      return;
    }
    if (e.kind == ExprKind::Index) {
      element(e, true);
      return;
    }
    error(loc, "syntax", "invalid assignment target");
  }

  // Array element access; `full` requires one subscript per dimension.
  void element(const Expr& e, bool full) {
    const Expr& base = e.children[0];
    const Symbol* sym = lookup(base.text);
    for (std::size_t i = 1; i < e.children.size(); ++i) value(e.children[i]);
    if (!sym) {
      error(base.loc, "undeclared", fmt::format("'{}' is not declared", base.text));
      return;
    }
    std::size_t subs = e.children.size() - 1;
    if (!sym->is_array) {
      error(base.loc, "not-array", fmt::format("'{}' is not an array", base.text));
    } else if (subs > sym->rank || (full && subs != sym->rank)) {
      error(base.loc, "subscripts",
            fmt::format("'{}' has {} dimension(s) but {} subscript(s) were given", base.text,
                        sym->rank, subs));
    }
  }

  void value(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLiteral:
      case ExprKind::FloatLiteral:
      case ExprKind::SizeOf: {
        if (e.kind == ExprKind::SizeOf && !resolve_type(e.text, cfg_.elem_type, cfg_.acc_type)) {
          error(e.loc, "unknown-type", fmt::format("unknown type '{}'", e.text));
        }
        return;
      }
      case ExprKind::Identifier: {
        const Symbol* sym = lookup(e.text);
        if (sym) {
          if (sym->is_array) {
            error(e.loc, "array-as-value",
                  fmt::format("array '{}' cannot be used as a value", e.text));
          }
          return;
        }
        if (builtin_constant(e.text) || bindings_.count(e.text)) return;
        error(e.loc, "undeclared", fmt::format("'{}' is not declared", e.text));
        return;
      }
      case ExprKind::Index: element(e, true); return;
      case ExprKind::AddressOf:
        error(e.loc, "address-of", "addresses can only be passed as DRAM intrinsic arguments");
        return;
      case ExprKind::Cast:
        if (!resolve_type(e.text, cfg_.elem_type, cfg_.acc_type)) {
          error(e.loc, "unknown-type", fmt::format("unknown type '{}'", e.text));
        }
        [[fallthrough]];
      default:
        for (const auto& c : e.children) value(c);
    }
  }

  void dram_arg(const Expr& e, const IntrinsicInfo& info, std::size_t index) {
    bool zero_ok = index == 0 && (info.id == Intrinsic::Mvin || info.id == Intrinsic::Mvin2 ||
                                  info.id == Intrinsic::Mvin3);
    if (e.kind == ExprKind::IntLiteral || (e.kind == ExprKind::Identifier && e.text == "NULL")) {
      if (!zero_ok || e.int_value != 0) {
        error(e.loc, "dram-arg",
              fmt::format("argument {} of {} must reference a declared array", index + 1, info.name));
      }
      return;
    }
    if (e.kind == ExprKind::Identifier) {
      const Symbol* sym = lookup(e.text);
      if (!sym) {
        error(e.loc, "undeclared", fmt::format("'{}' is not declared", e.text));
      } else if (!sym->is_array) {
        error(e.loc, "dram-arg", fmt::format("'{}' is not an array", e.text));
      }
      return;
    }
    const Expr* idx = &e;
    if (e.kind == ExprKind::AddressOf) idx = &e.children[0];
    if (idx->kind == ExprKind::Index) {
      element(*idx, false);
      return;
    }
    if (idx->kind == ExprKind::Identifier) {
      dram_arg(*idx, info, index);
      return;
    }
    error(e.loc, "dram-arg",
          fmt::format("argument {} of {} must reference a declared array", index + 1, info.name));
  }

  void local_arg(const Expr& e, const IntrinsicInfo& info, std::size_t index) {
    value(e);
    auto v = fold(e);
    if (!v) return;
    auto raw = static_cast<std::uint32_t>(*v);
    bool no_addr_ok = (info.id == Intrinsic::Preload && index == 0) ||
                      ((info.id == Intrinsic::ComputePreloaded ||
                        info.id == Intrinsic::ComputeAccumulated) &&
                       index == 1) ||
                      (info.id == Intrinsic::Preload && index == 1);
    if (raw == kNoAddress && no_addr_ok) return;
    std::uint32_t row = raw & 0x1fffffffu;
    if (raw & 0x80000000u) {
      if (row >= cfg_.acc_rows()) {
        error(e.loc, "acc-row-range",
              fmt::format("accumulator row out of range: {} >= {}", row, cfg_.acc_rows()));
      }
    } else if (row >= cfg_.spad_rows()) {
      error(e.loc, "spad-row-range",
            fmt::format("scratchpad row out of range: {} >= {}", row, cfg_.spad_rows()));
    }
  }

  void call(const Stmt& s) {
    auto info = lookup_intrinsic(s.callee);
    if (!info) {
      error(s.loc, "unknown-intrinsic", fmt::format("unknown intrinsic '{}'", s.callee));
      return;
    }
    int n = static_cast<int>(s.args.size());
    if (n < info->min_args || n > info->max_args) {
      std::string want = info->min_args == info->max_args
                             ? std::to_string(info->min_args)
                             : fmt::format("{} to {}", info->min_args, info->max_args);
      error(s.loc, "arity",
            fmt::format("{} expects {} argument(s), got {}", s.callee, want, n));
    }
    if (!info->executable) {
      error(s.loc, "not-executable",
            fmt::format("{} is a hardware-FSM operation the simulator does not execute",
                        s.callee));
      return;
    }
    for (std::size_t i = 0; i < s.args.size() && i < info->roles.size(); ++i) {
      switch (info->roles[i]) {
        case ArgRole::DramAddr: dram_arg(s.args[i], *info, i); break;
        case ArgRole::LocalAddr: local_arg(s.args[i], *info, i); break;
        default: value(s.args[i]); break;
      }
    }
  }

  const sim::AcceleratorConfig& cfg_;
  Bindings bindings_;
  std::vector<std::map<std::string, Symbol>> scopes_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

Bindings default_bindings(const sim::AcceleratorConfig& cfg) { return {{"DIM", cfg.dim}}; }

std::optional<std::int64_t> const_eval(const Expr& e, const Bindings& names,
                                       const sim::AcceleratorConfig& cfg) {
  switch (e.kind) {
    case ExprKind::IntLiteral: return static_cast<std::int64_t>(e.int_value);
    case ExprKind::Identifier: {
      auto it = names.find(e.text);
      if (it != names.end()) return it->second;
      if (auto b = builtin_constant(e.text)) return *b;
      return std::nullopt;
    }
    case ExprKind::SizeOf: {
      auto t = resolve_type(e.text, cfg.elem_type, cfg.acc_type);
      if (!t) return std::nullopt;
      return static_cast<std::int64_t>(byte_size(*t));
    }
    case ExprKind::Cast: {
      auto v = const_eval(e.children[0], names, cfg);
      auto t = resolve_type(e.text, cfg.elem_type, cfg.acc_type);
      if (!v || !t || is_float(*t)) return std::nullopt;
      return wrap_int(*v, *t);
    }
    case ExprKind::Unary: {
      auto v = const_eval(e.children[0], names, cfg);
      if (!v) return std::nullopt;
      switch (e.unary_op) {
        case UnaryOp::Neg: return -*v;
        case UnaryOp::Plus: return *v;
        case UnaryOp::BitNot: {
          // `~(uint32_t)0` must stay a 32-bit value.
          const Expr& c = e.children[0];
          if (c.kind == ExprKind::Cast) {
            auto t = resolve_type(c.text, cfg.elem_type, cfg.acc_type);
            if (t && bit_width(*t) <= 32) return wrap_int(~*v, *t);
          }
          return ~*v;
        }
        case UnaryOp::LogicalNot: return !*v;
      }
      return std::nullopt;
    }
    case ExprKind::Binary: {
      auto a = const_eval(e.children[0], names, cfg);
      if (!a) return std::nullopt;
      if (e.binary_op == BinaryOp::LogicalAnd && !*a) return 0;
      if (e.binary_op == BinaryOp::LogicalOr && *a) return 1;
      auto b = const_eval(e.children[1], names, cfg);
      if (!b) return std::nullopt;
      return fold_binary(e.binary_op, *a, *b);
    }
    case ExprKind::Ternary: {
      auto c = const_eval(e.children[0], names, cfg);
      if (!c) return std::nullopt;
      return const_eval(e.children[*c ? 1 : 2], names, cfg);
    }
    default: return std::nullopt;
  }
}

std::vector<Diagnostic> validate_kernel(const KernelProgram& p, const sim::AcceleratorConfig& cfg,
                                        const Bindings& bindings) {
  return Validator(cfg, bindings).run(p);
}

}  // namespace tensopt::dsl
