#include <map>

#include <fmt/format.h>

#include "ir.hpp"
#include "tensopt/dsl/intrinsics.hpp"

namespace tensopt::sim::detail {
namespace {

using dsl::Expr;
using dsl::ExprKind;
using dsl::SourceLoc;
using dsl::Stmt;
using dsl::StmtKind;

struct Symbol {
  enum Kind { Scalar, Array, Constant } kind = Scalar;
  ScalarType type = ScalarType::I64;
  std::int32_t slot = -1;
  Val value{0};
};

ScalarType promote(ScalarType t) {
  switch (t) {
    case ScalarType::Bool:
    case ScalarType::I8:
    case ScalarType::U8:
    case ScalarType::I16:
    case ScalarType::U16: return ScalarType::I32;
    default: return t;
  }
}

int rank(ScalarType t) { return byte_size(t) == 8 ? 2 : 1; }

ScalarType common_type(ScalarType a, ScalarType b) {
  if (a == ScalarType::F64 || b == ScalarType::F64) return ScalarType::F64;
  if (a == ScalarType::F32 || b == ScalarType::F32) return ScalarType::F32;
  a = promote(a);
  b = promote(b);
  if (a == b) return a;
  if (is_signed(a) == is_signed(b)) return rank(a) >= rank(b) ? a : b;
  ScalarType u = is_signed(a) ? b : a;
  ScalarType s = is_signed(a) ? a : b;
  return rank(u) >= rank(s) ? u : s;
}

XOp binary_xop(dsl::BinaryOp op) {
  using B = dsl::BinaryOp;
  switch (op) {
    case B::Mul: return XOp::Mul;
    case B::Div: return XOp::Div;
    case B::Mod: return XOp::Mod;
    case B::Add: return XOp::Add;
    case B::Sub: return XOp::Sub;
    case B::Shl: return XOp::Shl;
    case B::Shr: return XOp::Shr;
    case B::Lt: return XOp::Lt;
    case B::Le: return XOp::Le;
    case B::Gt: return XOp::Gt;
    case B::Ge: return XOp::Ge;
    case B::Eq: return XOp::Eq;
    case B::Ne: return XOp::Ne;
    case B::BitAnd: return XOp::BitAnd;
    case B::BitXor: return XOp::BitXor;
    case B::BitOr: return XOp::BitOr;
    case B::LogicalAnd: return XOp::LAnd;
    case B::LogicalOr: return XOp::LOr;
  }
  return XOp::Add;
}

XOp assign_xop(dsl::AssignOp op) {
  using A = dsl::AssignOp;
  switch (op) {
    case A::Add: return XOp::Add;
    case A::Sub: return XOp::Sub;
    case A::Mul: return XOp::Mul;
    case A::Div: return XOp::Div;
    case A::Mod: return XOp::Mod;
    case A::Shl: return XOp::Shl;
    case A::Shr: return XOp::Shr;
    case A::And: return XOp::BitAnd;
    case A::Or: return XOp::BitOr;
    case A::Xor: return XOp::BitXor;
    case A::Set: break;
  }
  return XOp::Add;
}

bool is_comparison(XOp op) {
  return op == XOp::Lt || op == XOp::Le || op == XOp::Gt || op == XOp::Ge || op == XOp::Eq ||
         op == XOp::Ne;
}

// Every AST node costs one evaluation, including literals; folding does not make code cheaper.
constexpr std::int32_t kImmediate = 1;

XNode constant(Val v, ScalarType t, std::int32_t cost, SourceLoc loc) {
  XNode n;
  n.op = XOp::Const;
  n.type = t;
  n.k = v;
  n.cost = cost;
  n.loc = loc;
  return n;
}

XNode int_const(std::int64_t v, ScalarType t, std::int32_t cost, SourceLoc loc) {
  Val k;
  k.i = wrap_int(v, t);
  return constant(k, t, cost, loc);
}

class Compiler {
 public:
  Compiler(const AcceleratorConfig& cfg, dsl::Bindings bindings)
      : bindings_(std::move(bindings)) {
    out_.cfg = cfg;
  }

  Compiled run(const dsl::KernelProgram& p) {
    scopes_.emplace_back();
    for (const auto& param : p.params) {
      ArrayInfo a;
      a.name = param.name;
      a.type = resolve(param.type.name, SourceLoc{});
      a.param = true;
      for (const auto& d : param.dims) a.shape.push_back(dimension(d));
      out_.params.push_back({a.name, a.type, a.shape});
      declare(param.name, {Symbol::Array, a.type, static_cast<std::int32_t>(out_.arrays.size())},
              SourceLoc{});
      out_.arrays.push_back(std::move(a));
    }
    out_.body = block(p.body);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(SourceLoc loc, std::string code, std::string msg) {
    throw CompileError{loc, std::move(code), std::move(msg)};
  }

  ScalarType resolve(const std::string& name, SourceLoc loc) {
    auto t = resolve_type(name, out_.cfg.elem_type, out_.cfg.acc_type);
    if (!t) fail(loc, "unknown-type", fmt::format("unknown type '{}'", name));
    return *t;
  }

  void declare(const std::string& name, Symbol s, SourceLoc loc) {
    auto& scope = scopes_.back();
    if (scope.count(name)) fail(loc, "redeclared", fmt::format("'{}' is already declared", name));
    scope[name] = s;
  }

  const Symbol* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  std::size_t dimension(const Expr& e) {
    XNode n = expr(e);
    if (n.op != XOp::Const || is_float(n.type)) {
      fail(e.loc, "vla", "array dimensions must be integer constants");
    }
    if (n.k.i < 1 || n.k.i > (std::int64_t{1} << 32)) {
      fail(e.loc, "array-shape", fmt::format("array dimension {} out of range", n.k.i));
    }
    return static_cast<std::size_t>(n.k.i);
  }

  // ---- expressions ----

  static std::int32_t cost_of(const std::vector<XNode>& kids) {
    std::int32_t c = 0;
    for (const auto& k : kids) c += k.cost;
    return c;
  }

  // Evaluates a node whose children are all constants; leaves it alone if
  // evaluation would fail at run time (e.g. division by zero).
  static XNode fold(XNode n) {
    for (const auto& k : n.kids) {
      if (k.op != XOp::Const) return n;
    }
    try {
      Val v;
      switch (n.op) {
        case XOp::Convert: v = convert(n.kids[0].k, n.kids[0].type, n.type); break;
        case XOp::Neg:
        case XOp::BitNot:
        case XOp::LNot: v = apply_unary(n.op, n.kids[0].k, n.operand); break;
        case XOp::LAnd:
          v.i = truthy(n.kids[0].k, n.kids[0].type) && truthy(n.kids[1].k, n.kids[1].type);
          break;
        case XOp::LOr:
          v.i = truthy(n.kids[0].k, n.kids[0].type) || truthy(n.kids[1].k, n.kids[1].type);
          break;
        case XOp::Cond:
          v = truthy(n.kids[0].k, n.kids[0].type) ? n.kids[1].k : n.kids[2].k;
          break;
        case XOp::Var:
        case XOp::Elem:
        case XOp::Const: return n;
        default: v = apply_binary(n.op, n.kids[0].k, n.kids[1].k, n.operand); break;
      }
      return constant(v, n.type, n.cost + cost_of(n.kids), n.loc);  // folding keeps the node cost
    } catch (const EvalError&) {
      return n;
    }
  }

  static XNode conv(XNode x, ScalarType t, std::int32_t cost = 0) {
    if (x.type == t && cost == 0) return x;
    XNode n;
    n.op = XOp::Convert;
    n.type = t;
    n.operand = x.type;
    n.cost = cost;
    n.loc = x.loc;
    n.kids.push_back(std::move(x));
    return fold(std::move(n));
  }

  XNode make_binary(XOp op, XNode a, XNode b, SourceLoc loc, std::int32_t cost = 1) {
    XNode n;
    n.op = op;
    n.loc = loc;
    n.cost = cost;
    if (op == XOp::LAnd || op == XOp::LOr) {
      n.type = ScalarType::I32;
      n.kids = {std::move(a), std::move(b)};
      return fold(std::move(n));
    }
    if (op == XOp::Shl || op == XOp::Shr) {
      if (is_float(a.type) || is_float(b.type)) {
        fail(loc, "operand-type", "shift operands must be integers");
      }
      n.type = n.operand = promote(a.type);
      n.kids = {conv(std::move(a), n.type), conv(std::move(b), ScalarType::I64)};
      return fold(std::move(n));
    }
    ScalarType t = common_type(a.type, b.type);
    if (is_float(t) && (op == XOp::Mod || op == XOp::BitAnd || op == XOp::BitOr ||
                        op == XOp::BitXor)) {
      fail(loc, "operand-type", "operator requires integer operands");
    }
    n.operand = t;
    n.type = is_comparison(op) ? ScalarType::I32 : t;
    n.kids = {conv(std::move(a), t), conv(std::move(b), t)};
    return fold(std::move(n));
  }

  XNode element(const Expr& e) {
    const Expr& base = e.children[0];
    const Symbol* s = base.kind == ExprKind::Identifier ? lookup(base.text) : nullptr;
    if (!s || s->kind != Symbol::Array) fail(e.loc, "not-array", "subscripted value is not an array");
    const ArrayInfo& a = out_.arrays[s->slot];
    if (e.children.size() - 1 != a.shape.size()) {
      fail(e.loc, "subscripts",
           fmt::format("'{}' needs {} subscripts", a.name, a.shape.size()));
    }
    XNode n;
    n.op = XOp::Elem;
    n.type = a.type;
    n.slot = s->slot;
    n.loc = e.loc;
    n.cost = 2;  // base identifier + subscript node
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      XNode sub = expr(e.children[i]);
      if (is_float(sub.type)) fail(e.children[i].loc, "operand-type", "array subscript is not an integer");
      n.kids.push_back(conv(std::move(sub), ScalarType::I64));
    }
    return n;
  }

  XNode expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLiteral: {
        bool u = e.suffix.find_first_of("uU") != std::string::npos;
        bool l = e.suffix.find_first_of("lL") != std::string::npos;
        ScalarType t = u ? (l ? ScalarType::U64 : ScalarType::U32) : ScalarType::I64;
        return int_const(static_cast<std::int64_t>(e.int_value), t, kImmediate, e.loc);
      }
      case ExprKind::FloatLiteral: {
        bool f = !e.text.empty() && (e.text.back() == 'f' || e.text.back() == 'F');
        ScalarType t = f ? ScalarType::F32 : ScalarType::F64;
        Val v;
        v.f = f ? static_cast<double>(static_cast<float>(e.float_value)) : e.float_value;
        return constant(v, t, kImmediate, e.loc);
      }
      case ExprKind::Identifier: {
        if (const Symbol* s = lookup(e.text)) {
          if (s->kind == Symbol::Array) {
            fail(e.loc, "array-as-value", fmt::format("array '{}' used as a value", e.text));
          }
          if (s->kind == Symbol::Constant) return constant(s->value, s->type, kImmediate, e.loc);
          XNode n;
          n.op = XOp::Var;
          n.type = s->type;
          n.slot = s->slot;
          n.loc = e.loc;
          return n;
        }
        if (auto b = bindings_.find(e.text); b != bindings_.end()) {
          return int_const(b->second, ScalarType::I64, kImmediate, e.loc);
        }
        if (auto c = dsl::builtin_constant(e.text)) return int_const(*c, ScalarType::I64, kImmediate, e.loc);
        fail(e.loc, "undeclared", fmt::format("'{}' is not declared", e.text));
      }
      case ExprKind::Index: return element(e);
      case ExprKind::AddressOf:
        fail(e.loc, "address-of", "'&' is only allowed in DRAM address arguments");
      case ExprKind::Unary: {
        XNode a = expr(e.children[0]);
        switch (e.unary_op) {
          case dsl::UnaryOp::Plus: return conv(std::move(a), promote(a.type), 1);
          case dsl::UnaryOp::LogicalNot: {
            XNode n;
            n.op = XOp::LNot;
            n.type = ScalarType::I32;
            n.operand = a.type;
            n.loc = e.loc;
            n.kids.push_back(std::move(a));
            return fold(std::move(n));
          }
          case dsl::UnaryOp::Neg:
          case dsl::UnaryOp::BitNot: {
            if (e.unary_op == dsl::UnaryOp::BitNot && is_float(a.type)) {
              fail(e.loc, "operand-type", "'~' requires an integer operand");
            }
            XNode n;
            n.op = e.unary_op == dsl::UnaryOp::Neg ? XOp::Neg : XOp::BitNot;
            n.type = n.operand = promote(a.type);
            n.loc = e.loc;
            n.kids.push_back(conv(std::move(a), n.type));
            return fold(std::move(n));
          }
        }
        break;
      }
      case ExprKind::Binary:
        return make_binary(binary_xop(e.binary_op), expr(e.children[0]), expr(e.children[1]),
                           e.loc);
      case ExprKind::Ternary: {
        XNode c = expr(e.children[0]);
        XNode a = expr(e.children[1]);
        XNode b = expr(e.children[2]);
        ScalarType t = common_type(a.type, b.type);
        XNode n;
        n.op = XOp::Cond;
        n.type = t;
        n.loc = e.loc;
        n.kids = {std::move(c), conv(std::move(a), t), conv(std::move(b), t)};
        return fold(std::move(n));
      }
      case ExprKind::Cast: return conv(expr(e.children[0]), resolve(e.text, e.loc), 1);
      case ExprKind::SizeOf:
        return int_const(static_cast<std::int64_t>(byte_size(resolve(e.text, e.loc))),
                         ScalarType::U64, kImmediate, e.loc);
    }
    fail(e.loc, "syntax", "unsupported expression");
  }

  DramRef dram_ref(const Expr& e) {
    DramRef r;
    r.loc = e.loc;
    if ((e.kind == ExprKind::IntLiteral && e.int_value == 0) ||
        (e.kind == ExprKind::Identifier && e.text == "NULL" && !lookup(e.text))) {
      r.zero = true;
      return r;
    }
    const Expr* x = e.kind == ExprKind::AddressOf ? &e.children[0] : &e;
    const Expr* base = x->kind == ExprKind::Index ? &x->children[0] : x;
    const Symbol* s = base->kind == ExprKind::Identifier ? lookup(base->text) : nullptr;
    if (!s || s->kind != Symbol::Array) {
      fail(e.loc, "dram-arg", "DRAM address must reference a declared array");
    }
    r.array = s->slot;
    if (x->kind == ExprKind::Index) {
      const ArrayInfo& a = out_.arrays[s->slot];
      if (x->children.size() - 1 > a.shape.size()) {
        fail(e.loc, "subscripts", fmt::format("too many subscripts for '{}'", a.name));
      }
      for (std::size_t i = 1; i < x->children.size(); ++i) {
        r.subs.push_back(conv(expr(x->children[i]), ScalarType::I64));
      }
    }
    return r;
  }

  // ---- statements ----

  std::vector<SNode> block(const std::vector<Stmt>& stmts) {
    scopes_.emplace_back();
    std::vector<SNode> out;
    for (const auto& s : stmts) statement(s, out);
    scopes_.pop_back();
    return out;
  }

  SNode set_var(std::int32_t slot, ScalarType t, XNode value, SourceLoc loc) {
    SNode n;
    n.op = SOp::SetVar;
    n.loc = loc;
    n.slot = slot;
    n.value = conv(std::move(value), t);
    return n;
  }

  std::int32_t new_slot(ScalarType t) {
    out_.slots.push_back(t);
    return static_cast<std::int32_t>(out_.slots.size() - 1);
  }

  void declaration(const Stmt& s, std::vector<SNode>& out) {
    const auto& d = s.decl;
    ScalarType t = resolve(d.type.name, s.loc);
    if (d.dims.empty()) {
      if (d.list) fail(s.loc, "initializer", "brace initializer on a scalar");
      XNode init = d.init ? expr(*d.init) : int_const(0, t, 0, s.loc);
      if (d.type.is_const && init.op == XOp::Const) {
        declare(d.name, {Symbol::Constant, t, -1, conv(std::move(init), t).k}, s.loc);
        return;
      }
      std::int32_t slot = new_slot(t);
      SNode n = set_var(slot, t, std::move(init), s.loc);
      if (d.type.is_static) n.once = out_.once_count++;
      out.push_back(std::move(n));
      declare(d.name, {Symbol::Scalar, t, slot}, s.loc);
      return;
    }
    if (d.init) fail(s.loc, "initializer", "array initialized with a scalar");
    ArrayInfo a;
    a.name = d.name;
    a.type = t;
    for (const auto& dim : d.dims) a.shape.push_back(dimension(dim));
    SNode n;
    n.op = SOp::InitArray;
    n.loc = s.loc;
    n.slot = static_cast<std::int32_t>(out_.arrays.size());
    if (d.list) {
      if (d.list->size() > a.count()) fail(s.loc, "initializer", "too many initializers");
      for (const auto& v : *d.list) n.list.push_back(conv(expr(v), t));
    }
    if (d.type.is_static) n.once = out_.once_count++;
    declare(d.name, {Symbol::Array, t, n.slot}, s.loc);
    out_.arrays.push_back(std::move(a));
    out.push_back(std::move(n));
  }

  // Target of an assignment, returned as a read node and an empty store node.
  std::pair<XNode, SNode> target(const Expr& e, SourceLoc loc) {
    SNode st;
    st.loc = loc;
    if (e.kind == ExprKind::Identifier) {
      const Symbol* s = lookup(e.text);
      if (!s) fail(e.loc, "undeclared", fmt::format("'{}' is not declared", e.text));
      if (s->kind == Symbol::Array) fail(e.loc, "array-assign", "cannot assign to an array");
      if (s->kind == Symbol::Constant) {
        fail(e.loc, "const-assign", fmt::format("cannot assign to constant '{}'", e.text));
      }
      st.op = SOp::SetVar;
      st.slot = s->slot;
      return {expr(e), std::move(st)};
    }
    if (e.kind != ExprKind::Index) fail(e.loc, "syntax", "invalid assignment target");
    XNode read = element(e);
    st.op = SOp::SetElem;
    st.slot = read.slot;
    st.subs = read.kids;
    return {std::move(read), std::move(st)};
  }

  SNode assignment(const Expr& tgt, dsl::AssignOp op, std::optional<XNode> rhs, SourceLoc loc) {
    auto [read, st] = target(tgt, loc);
    ScalarType t = read.type;
    XNode value = op == dsl::AssignOp::Set
                      ? std::move(*rhs)
                      : make_binary(assign_xop(op), std::move(read), std::move(*rhs), loc, 0);
    st.value = conv(std::move(value), t);
    return std::move(st);
  }

  SNode step(const Expr& var, dsl::StepKind k, const std::optional<Expr>& amount, SourceLoc loc) {
    using K = dsl::StepKind;
    bool inc = k == K::PostInc || k == K::PreInc || k == K::AddAssign;
    XNode rhs = amount ? expr(*amount) : int_const(1, ScalarType::I64, 0, loc);
    return assignment(var, inc ? dsl::AssignOp::Add : dsl::AssignOp::Sub, std::move(rhs), loc);
  }

  void statement(const Stmt& s, std::vector<SNode>& out) {
    switch (s.kind) {
      case StmtKind::Empty: return;
      case StmtKind::Block: {
        SNode n;
        n.op = SOp::Block;
        n.loc = s.loc;
        n.body = block(s.body);
        out.push_back(std::move(n));
        return;
      }
      case StmtKind::Decl: declaration(s, out); return;
      case StmtKind::Assign:
        out.push_back(assignment(s.target, s.assign_op, expr(s.value), s.loc));
        return;
      case StmtKind::IncDec: out.push_back(step(s.target, s.incdec, std::nullopt, s.loc)); return;
      case StmtKind::If: {
        SNode n;
        n.op = SOp::If;
        n.loc = s.loc;
        n.value = expr(s.cond);
        n.body = block(s.body);
        if (s.has_else) n.alt = block(s.else_body);
        out.push_back(std::move(n));
        return;
      }
      case StmtKind::For: {
        const auto& L = s.loop;
        scopes_.emplace_back();
        SNode n;
        n.op = SOp::For;
        n.loc = s.loc;
        SNode init;
        if (L.decl_type) {
          ScalarType t = resolve(L.decl_type->name, s.loc);
          XNode v = expr(L.init);
          std::int32_t slot = new_slot(t);
          declare(L.var, {Symbol::Scalar, t, slot}, s.loc);
          init = set_var(slot, t, std::move(v), s.loc);
        } else {
          init = assignment(Expr::ident(L.var), dsl::AssignOp::Set, expr(L.init), s.loc);
        }
        Expr var = Expr::ident(L.var);
        var.loc = s.loc;
        n.value = expr(L.cond);
        n.alt.push_back(std::move(init));
        n.alt.push_back(step(var, L.step_kind, L.step, s.loc));
        n.body = block(s.body);
        scopes_.pop_back();
        out.push_back(std::move(n));
        return;
      }
      case StmtKind::Call: {
        auto info = dsl::lookup_intrinsic(s.callee);
        if (!info) fail(s.loc, "unknown-intrinsic", fmt::format("unknown intrinsic '{}'", s.callee));
        if (!info->executable) {
          fail(s.loc, "not-executable",
               fmt::format("'{}' is a hardware-FSM routine the simulator does not execute",
                           s.callee));
        }
        if (static_cast<int>(s.args.size()) < info->min_args ||
            static_cast<int>(s.args.size()) > info->max_args) {
          fail(s.loc, "arity", fmt::format("'{}' expects {} arguments", s.callee, info->max_args));
        }
        SNode n;
        n.op = SOp::Call;
        n.loc = s.loc;
        n.intrinsic = info->id;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          if (info->roles[i] == dsl::ArgRole::DramAddr) {
            n.drefs.push_back(dram_ref(s.args[i]));
            n.args.push_back(int_const(0, ScalarType::I64, kImmediate, s.args[i].loc));
          } else {
            n.args.push_back(expr(s.args[i]));
          }
        }
        out.push_back(std::move(n));
        return;
      }
    }
  }

  dsl::Bindings bindings_;
  Compiled out_;
  std::vector<std::map<std::string, Symbol>> scopes_;
};

}  // namespace

Compiled compile_program(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                         const dsl::Bindings& bindings) {
  dsl::Bindings all = dsl::default_bindings(cfg);
  for (const auto& [k, v] : bindings) all[k] = v;
  return Compiler(cfg, std::move(all)).run(p);
}

}  // namespace tensopt::sim::detail
