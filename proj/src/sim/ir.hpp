// Internal representation the simulator executes: the kernel AST with every
// name resolved to a slot, every expression typed with C-like conversions,
// and constants folded.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensopt/core/scalar.hpp"
#include "tensopt/dsl/ast.hpp"
#include "tensopt/dsl/intrinsics.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/sim/simulator.hpp"

namespace tensopt::sim::detail {

// Integers keep their value normalized to the static type (U64 as raw bits).
union Val {
  std::int64_t i;
  double f;
};

enum class XOp : std::uint8_t {
  Const, Var, Elem, Convert,
  Neg, BitNot, LNot,
  Add, Sub, Mul, Div, Mod, Shl, Shr,
  Lt, Le, Gt, Ge, Eq, Ne,
  BitAnd, BitXor, BitOr,
  LAnd, LOr, Cond,
};

struct XNode {
  XOp op = XOp::Const;
  ScalarType type = ScalarType::I64;     // result type
  ScalarType operand = ScalarType::I64;  // common operand type (binary) / source type (Convert)
  std::int32_t cost = 1;                 // AST nodes this node accounts for
  std::int32_t slot = -1;                // Var: scalar slot; Elem: array id
  Val k{0};
  dsl::SourceLoc loc;
  std::vector<XNode> kids;
};

struct DramRef {
  bool zero = false;  // literal 0 / NULL: zero-fill
  std::int32_t array = -1;
  std::vector<XNode> subs;  // leading subscripts; the rest are 0
  dsl::SourceLoc loc;
};

enum class SOp : std::uint8_t { Block, SetVar, SetElem, InitArray, For, If, Call };

struct SNode {
  SOp op = SOp::Block;
  dsl::SourceLoc loc;
  std::int32_t slot = -1;         // SetVar: scalar slot; SetElem/InitArray: array id
  std::int32_t once = -1;         // static initializers run once per run
  std::vector<XNode> subs;        // SetElem subscripts
  XNode value;                    // SetVar/SetElem value (already converted); For/If condition
  std::vector<XNode> list;        // InitArray brace list (converted)
  std::vector<SNode> body;        // Block/For/If-then
  std::vector<SNode> alt;         // If-else; For: [init, step]
  dsl::Intrinsic intrinsic = dsl::Intrinsic::Fence;
  std::vector<XNode> args;        // Call: Scalar/LocalAddr args (DramAddr slots hold Const 0)
  std::vector<DramRef> drefs;     // Call: one per DramAddr argument, in order
};

struct ArrayInfo {
  std::string name;
  ScalarType type = ScalarType::I8;
  std::vector<std::size_t> shape;
  bool param = false;
  std::size_t count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

struct Compiled {
  AcceleratorConfig cfg;
  std::vector<ParamInfo> params;  // arrays [0, params.size()) are the parameters
  std::vector<ArrayInfo> arrays;
  std::vector<ScalarType> slots;
  std::int32_t once_count = 0;
  std::vector<SNode> body;
};

/// Throws CompileError on problems the validator does not catch.
struct CompileError {
  dsl::SourceLoc loc;
  std::string code;
  std::string message;
};

Compiled compile_program(const dsl::KernelProgram& p, const AcceleratorConfig& cfg,
                         const dsl::Bindings& bindings);

// Scalar semantics shared by the compiler (folding) and the interpreter.
struct EvalError {
  std::string message;
};
Val convert(Val v, ScalarType from, ScalarType to);
Val apply_unary(XOp op, Val a, ScalarType t);
/// `t` is the operand type; comparisons return 0/1.
Val apply_binary(XOp op, Val a, Val b, ScalarType t);
bool truthy(Val v, ScalarType t);

}  // namespace tensopt::sim::detail
