#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tensopt::dsl {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

/// A spelled type name plus qualifiers. The spelling is kept verbatim
/// (`int_fast32_t`, `elem_t`, ...) so printing reproduces the source dialect.
struct TypeSpec {
  std::string name;
  bool is_const = false;
  bool is_static = false;

  bool operator==(const TypeSpec&) const = default;
};

enum class ExprKind {
  IntLiteral,
  FloatLiteral,
  Identifier,
  Index,      // children[0] = base, children[1..] = subscripts
  AddressOf,  // children[0] = Index or Identifier
  Unary,
  Binary,
  Ternary,
  Cast,       // text = target type, children[0] = operand
  SizeOf,     // text = type name
};

enum class UnaryOp { Neg, Plus, BitNot, LogicalNot };

enum class BinaryOp {
  Mul, Div, Mod,
  Add, Sub,
  Shl, Shr,
  Lt, Le, Gt, Ge,
  Eq, Ne,
  BitAnd, BitXor, BitOr,
  LogicalAnd, LogicalOr,
};

struct Expr {
  ExprKind kind = ExprKind::IntLiteral;
  SourceLoc loc;

  // IntLiteral: value, hex, suffix. FloatLiteral: float_value and the
  // original spelling in `text`. Identifier/Cast/SizeOf: `text`.
  std::uint64_t int_value = 0;
  bool hex = false;
  std::string suffix;
  double float_value = 0.0;
  std::string text;

  UnaryOp unary_op = UnaryOp::Neg;
  BinaryOp binary_op = BinaryOp::Add;
  std::vector<Expr> children;

  static Expr int_lit(std::uint64_t v, bool hex = false, std::string suffix = {});
  static Expr float_lit(double v, std::string spelling);
  static Expr ident(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr ternary(Expr cond, Expr then_e, Expr else_e);
  static Expr index(Expr base, std::vector<Expr> subscripts);
  static Expr address_of(Expr operand);
  static Expr cast(std::string type, Expr operand);
  static Expr size_of(std::string type);
};

/// Structural equality; source locations are ignored.
bool operator==(const Expr& a, const Expr& b);

enum class AssignOp { Set, Add, Sub, Mul, Div, Mod, Shl, Shr, And, Or, Xor };

enum class StepKind { PostInc, PreInc, PostDec, PreDec, AddAssign, SubAssign };

enum class StmtKind { Block, Decl, Assign, IncDec, Call, For, If, Empty };

struct Stmt;

struct Declaration {
  TypeSpec type;
  std::string name;
  std::vector<Expr> dims;                 // empty for scalars
  std::optional<Expr> init;               // scalar initializer
  std::optional<std::vector<Expr>> list;  // brace initializer

  bool operator==(const Declaration&) const = default;
};

struct ForLoop {
  // Induction variable: declared in the header when `decl_type` is set,
  // otherwise assigned to an existing variable.
  std::optional<TypeSpec> decl_type;
  std::string var;
  Expr init;
  Expr cond;
  StepKind step_kind = StepKind::PostInc;
  std::optional<Expr> step;  // AddAssign/SubAssign only

  bool operator==(const ForLoop&) const = default;
};

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  SourceLoc loc;

  std::vector<Stmt> body;  // Block statements; For body; If then-branch
  std::vector<Stmt> else_body;
  bool has_else = false;

  Declaration decl;

  // Assign / IncDec: target is Identifier or Index.
  Expr target;
  AssignOp assign_op = AssignOp::Set;
  Expr value;
  StepKind incdec = StepKind::PostInc;

  // Call
  std::string callee;
  std::vector<Expr> args;

  ForLoop loop;
  Expr cond;  // If

  bool operator==(const Stmt& o) const;
};

struct ArrayParam {
  TypeSpec type;
  std::string name;
  std::vector<Expr> dims;

  bool operator==(const ArrayParam&) const = default;
};

struct KernelProgram {
  std::string name = "test";
  std::vector<ArrayParam> params;
  std::vector<Stmt> body;

  bool operator==(const KernelProgram&) const = default;
};

const char* to_string(BinaryOp op);
const char* to_string(UnaryOp op);
const char* to_string(AssignOp op);
int precedence(BinaryOp op);

}  // namespace tensopt::dsl
