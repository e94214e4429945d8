#include "tensopt/dsl/printer.hpp"

#include <fmt/format.h>

namespace tensopt::dsl {
namespace {

constexpr int kTernaryPrec = 0;
constexpr int kUnaryPrec = 20;
constexpr int kPrimaryPrec = 30;

int prec_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary: return precedence(e.binary_op);
    case ExprKind::Ternary: return kTernaryPrec;
    case ExprKind::Unary:
    case ExprKind::Cast:
    case ExprKind::AddressOf: return kUnaryPrec;
    default: return kPrimaryPrec;
  }
}

void emit(const Expr& e, std::string& out);

void emit_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  emit(e, out);
  if (wrap) out += ')';
}

// Operand of a prefix operator: parenthesize anything that is not primary so
// that sequences like `- -x` never turn into `--x`.
void emit_prefix_operand(const Expr& e, std::string& out) {
  emit_wrapped(e, prec_of(e) < kPrimaryPrec && e.kind != ExprKind::Cast, out);
}

void emit(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::IntLiteral:
      if (e.hex) {
        out += fmt::format("0x{:x}", e.int_value);
      } else {
        out += std::to_string(e.int_value);
      }
      out += e.suffix;
      return;
    case ExprKind::FloatLiteral:
      out += e.text;
      return;
    case ExprKind::Identifier:
      out += e.text;
      return;
    case ExprKind::SizeOf:
      out += "sizeof(" + e.text + ")";
      return;
    case ExprKind::Index:
      emit(e.children[0], out);
      for (std::size_t i = 1; i < e.children.size(); ++i) {
        out += '[';
        emit(e.children[i], out);
        out += ']';
      }
      return;
    case ExprKind::AddressOf:
      out += '&';
      emit(e.children[0], out);
      return;
    case ExprKind::Unary:
      out += to_string(e.unary_op);
      emit_prefix_operand(e.children[0], out);
      return;
    case ExprKind::Cast:
      out += "(" + e.text + ")";
      emit_prefix_operand(e.children[0], out);
      return;
    case ExprKind::Binary: {
      int p = precedence(e.binary_op);
      emit_wrapped(e.children[0], prec_of(e.children[0]) < p, out);
      out += ' ';
      out += to_string(e.binary_op);
      out += ' ';
      emit_wrapped(e.children[1], prec_of(e.children[1]) <= p, out);
      return;
    }
    case ExprKind::Ternary:
      emit_wrapped(e.children[0], e.children[0].kind == ExprKind::Ternary, out);
      out += " ? ";
      emit(e.children[1], out);
      out += " : ";
      emit(e.children[2], out);
      return;
  }
}

std::string type_text(const TypeSpec& t) {
  std::string s;
  if (t.is_static) s += "static ";
  if (t.is_const) s += "const ";
  return s + t.name;
}

const char* step_text(StepKind k) {
  switch (k) {
    case StepKind::PostInc: return "++";
    case StepKind::PostDec: return "--";
    case StepKind::PreInc: return "++";
    case StepKind::PreDec: return "--";
    case StepKind::AddAssign: return " += ";
    case StepKind::SubAssign: return " -= ";
  }
  return "";
}

class Printer {
 public:
  std::string run(const KernelProgram& p) {
    out_ = "void " + p.name + "(";
    for (std::size_t i = 0; i < p.params.size(); ++i) {
      if (i) out_ += ", ";
      const auto& a = p.params[i];
      out_ += type_text(a.type) + " " + a.name;
      for (const auto& d : a.dims) out_ += "[" + print_expr(d) + "]";
    }
    out_ += ") {\n";
    block(p.body, 1);
    out_ += "}\n";
    return std::move(out_);
  }

 private:
  void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }

  void block(const std::vector<Stmt>& body, int depth) {
    for (const auto& s : body) stmt(s, depth);
  }

  void stmt(const Stmt& s, int depth) {
    indent(depth);
    switch (s.kind) {
      case StmtKind::Block:
        out_ += "{\n";
        block(s.body, depth + 1);
        indent(depth);
        out_ += "}\n";
        return;
      case StmtKind::Empty:
        out_ += ";\n";
        return;
      case StmtKind::Decl: {
        const auto& d = s.decl;
        out_ += type_text(d.type) + " " + d.name;
        for (const auto& e : d.dims) out_ += "[" + print_expr(e) + "]";
        if (d.init) out_ += " = " + print_expr(*d.init);
        if (d.list) {
          out_ += " = {";
          for (std::size_t i = 0; i < d.list->size(); ++i) {
            out_ += i ? ", " : "";
            out_ += print_expr((*d.list)[i]);
          }
          out_ += "}";
        }
        out_ += ";\n";
        return;
      }
      case StmtKind::Assign:
        out_ += print_expr(s.target) + " " + to_string(s.assign_op) + " " + print_expr(s.value) +
                ";\n";
        return;
      case StmtKind::IncDec:
        out_ += incdec(s.target, s.incdec) + ";\n";
        return;
      case StmtKind::Call:
        out_ += s.callee + "(";
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          out_ += i ? ", " : "";
          out_ += print_expr(s.args[i]);
        }
        out_ += ");\n";
        return;
      case StmtKind::For: {
        const auto& f = s.loop;
        out_ += "for (";
        if (f.decl_type) out_ += type_text(*f.decl_type) + " ";
        out_ += f.var + " = " + print_expr(f.init) + "; " + print_expr(f.cond) + "; ";
        if (f.step_kind == StepKind::AddAssign || f.step_kind == StepKind::SubAssign) {
          out_ += f.var + step_text(f.step_kind) + print_expr(*f.step);
        } else {
          out_ += incdec(Expr::ident(f.var), f.step_kind);
        }
        out_ += ") {\n";
        block(s.body, depth + 1);
        indent(depth);
        out_ += "}\n";
        return;
      }
      case StmtKind::If:
        if_chain(s, depth);
        return;
    }
  }

  void if_chain(const Stmt& s, int depth) {
    out_ += "if (" + print_expr(s.cond) + ") {\n";
    block(s.body, depth + 1);
    indent(depth);
    out_ += "}";
    if (s.has_else) {
      if (s.else_body.size() == 1 && s.else_body[0].kind == StmtKind::If) {
        out_ += " else ";
        if_chain(s.else_body[0], depth);
        return;
      }
      out_ += " else {\n";
      block(s.else_body, depth + 1);
      indent(depth);
      out_ += "}";
    }
    out_ += "\n";
  }

  static std::string incdec(const Expr& target, StepKind k) {
    bool pre = k == StepKind::PreInc || k == StepKind::PreDec;
    return pre ? step_text(k) + print_expr(target) : print_expr(target) + step_text(k);
  }

  std::string out_;
};

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  emit(e, out);
  return out;
}

std::string print_kernel(const KernelProgram& p) { return Printer().run(p); }

}  // namespace tensopt::dsl
