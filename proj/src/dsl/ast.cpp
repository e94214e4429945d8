#include "tensopt/dsl/ast.hpp"

namespace tensopt::dsl {

Expr Expr::int_lit(std::uint64_t v, bool hex, std::string suffix) {
  Expr e;
  e.kind = ExprKind::IntLiteral;
  e.int_value = v;
  e.hex = hex;
  e.suffix = std::move(suffix);
  return e;
}

Expr Expr::float_lit(double v, std::string spelling) {
  Expr e;
  e.kind = ExprKind::FloatLiteral;
  e.float_value = v;
  e.text = std::move(spelling);
  return e;
}

Expr Expr::ident(std::string name) {
  Expr e;
  e.kind = ExprKind::Identifier;
  e.text = std::move(name);
  return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.unary_op = op;
  e.children.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.binary_op = op;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expr Expr::ternary(Expr cond, Expr then_e, Expr else_e) {
  Expr e;
  e.kind = ExprKind::Ternary;
  e.children.push_back(std::move(cond));
  e.children.push_back(std::move(then_e));
  e.children.push_back(std::move(else_e));
  return e;
}

Expr Expr::index(Expr base, std::vector<Expr> subscripts) {
  Expr e;
  e.kind = ExprKind::Index;
  e.children.push_back(std::move(base));
  for (auto& s : subscripts) e.children.push_back(std::move(s));
  return e;
}

Expr Expr::address_of(Expr operand) {
  Expr e;
  e.kind = ExprKind::AddressOf;
  e.children.push_back(std::move(operand));
  return e;
}

Expr Expr::cast(std::string type, Expr operand) {
  Expr e;
  e.kind = ExprKind::Cast;
  e.text = std::move(type);
  e.children.push_back(std::move(operand));
  return e;
}

Expr Expr::size_of(std::string type) {
  Expr e;
  e.kind = ExprKind::SizeOf;
  e.text = std::move(type);
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::IntLiteral:
      return a.int_value == b.int_value && a.hex == b.hex && a.suffix == b.suffix;
    case ExprKind::FloatLiteral:
      return a.text == b.text;
    case ExprKind::Identifier:
    case ExprKind::SizeOf:
      return a.text == b.text;
    case ExprKind::Cast:
      return a.text == b.text && a.children == b.children;
    case ExprKind::Unary:
      return a.unary_op == b.unary_op && a.children == b.children;
    case ExprKind::Binary:
      return a.binary_op == b.binary_op && a.children == b.children;
    case ExprKind::Index:
    case ExprKind::AddressOf:
    case ExprKind::Ternary:
      return a.children == b.children;
  }
  return false;
}

bool Stmt::operator==(const Stmt& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case StmtKind::Block:
      return body == o.body;
    case StmtKind::Decl:
      return decl == o.decl;
    case StmtKind::Assign:
      return target == o.target && assign_op == o.assign_op && value == o.value;
    case StmtKind::IncDec:
      return target == o.target && incdec == o.incdec;
    case StmtKind::Call:
      return callee == o.callee && args == o.args;
    case StmtKind::For:
      return loop == o.loop && body == o.body;
    case StmtKind::If:
      return cond == o.cond && body == o.body && has_else == o.has_else &&
             else_body == o.else_body;
    case StmtKind::Empty:
      return true;
  }
  return false;
}

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitXor: return "^";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::LogicalAnd: return "&&";
    case BinaryOp::LogicalOr: return "||";
  }
  return "?";
}

const char* to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Plus: return "+";
    case UnaryOp::BitNot: return "~";
    case UnaryOp::LogicalNot: return "!";
  }
  return "?";
}

const char* to_string(AssignOp op) {
  switch (op) {
    case AssignOp::Set: return "=";
    case AssignOp::Add: return "+=";
    case AssignOp::Sub: return "-=";
    case AssignOp::Mul: return "*=";
    case AssignOp::Div: return "/=";
    case AssignOp::Mod: return "%=";
    case AssignOp::Shl: return "<<=";
    case AssignOp::Shr: return ">>=";
    case AssignOp::And: return "&=";
    case AssignOp::Or: return "|=";
    case AssignOp::Xor: return "^=";
  }
  return "?";
}

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 10;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 9;
    case BinaryOp::Shl:
    case BinaryOp::Shr: return 8;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 7;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 6;
    case BinaryOp::BitAnd: return 5;
    case BinaryOp::BitXor: return 4;
    case BinaryOp::BitOr: return 3;
    case BinaryOp::LogicalAnd: return 2;
    case BinaryOp::LogicalOr: return 1;
  }
  return 0;
}

}  // namespace tensopt::dsl
