#include <cmath>
#include <limits>

#include "ir.hpp"

namespace tensopt::sim::detail {
namespace {

bool is_unsigned_int(ScalarType t) { return !is_float(t) && !is_signed(t); }

std::uint64_t bits(Val v) { return static_cast<std::uint64_t>(v.i); }

Val ival(std::int64_t i) {
  Val v;
  v.i = i;
  return v;
}

Val fval(double f, ScalarType t) {
  Val v;
  v.f = t == ScalarType::F32 ? static_cast<double>(static_cast<float>(f)) : f;
  return v;
}

Val norm(std::uint64_t raw, ScalarType t) {
  return ival(wrap_int(static_cast<std::int64_t>(raw), t));
}

double as_double(Val v, ScalarType t) {
  if (is_float(t)) return v.f;
  if (t == ScalarType::U64) return static_cast<double>(bits(v));
  return static_cast<double>(v.i);
}

}  // namespace

bool truthy(Val v, ScalarType t) { return is_float(t) ? v.f != 0.0 : v.i != 0; }

Val convert(Val v, ScalarType from, ScalarType to) {
  if (from == to) return v;
  if (to == ScalarType::Bool) return ival(truthy(v, from) ? 1 : 0);
  if (is_float(to)) return fval(as_double(v, from), to);
  if (!is_float(from)) return norm(bits(v), to);
  // float -> integer: truncate toward zero, saturate out-of-range values, NaN -> 0.
  double f = v.f;
  if (std::isnan(f)) return ival(0);
  f = std::trunc(f);
  if (to == ScalarType::U64) {
    if (f <= 0) return ival(0);
    if (f >= 18446744073709551615.0) return ival(-1);
    return ival(static_cast<std::int64_t>(static_cast<std::uint64_t>(f)));
  }
  if (f >= 9223372036854775807.0) return ival(saturate_int(std::numeric_limits<std::int64_t>::max(), to));
  if (f <= -9223372036854775808.0) return ival(saturate_int(std::numeric_limits<std::int64_t>::min(), to));
  return ival(saturate_int(static_cast<std::int64_t>(f), to));
}

Val apply_unary(XOp op, Val a, ScalarType t) {
  switch (op) {
    case XOp::Neg:
      if (is_float(t)) return fval(-a.f, t);
      return norm(0 - bits(a), t);
    case XOp::BitNot:
      if (is_float(t)) throw EvalError{"'~' applied to a floating-point value"};
      return norm(~bits(a), t);
    case XOp::LNot: return ival(truthy(a, t) ? 0 : 1);
    default: break;
  }
  throw EvalError{"bad unary operator"};
}

Val apply_binary(XOp op, Val a, Val b, ScalarType t) {
  if (is_float(t)) {
    switch (op) {
      case XOp::Add: return fval(a.f + b.f, t);
      case XOp::Sub: return fval(a.f - b.f, t);
      case XOp::Mul: return fval(a.f * b.f, t);
      case XOp::Div: return fval(a.f / b.f, t);
      case XOp::Lt: return ival(a.f < b.f);
      case XOp::Le: return ival(a.f <= b.f);
      case XOp::Gt: return ival(a.f > b.f);
      case XOp::Ge: return ival(a.f >= b.f);
      case XOp::Eq: return ival(a.f == b.f);
      case XOp::Ne: return ival(a.f != b.f);
      default: throw EvalError{"invalid operator for floating-point operands"};
    }
  }
  const bool u = is_unsigned_int(t);
  switch (op) {
    case XOp::Add: return norm(bits(a) + bits(b), t);
    case XOp::Sub: return norm(bits(a) - bits(b), t);
    case XOp::Mul: return norm(bits(a) * bits(b), t);
    case XOp::Div:
    case XOp::Mod: {
      if (b.i == 0) throw EvalError{"division by zero"};
      if (u) {
        std::uint64_t r = op == XOp::Div ? bits(a) / bits(b) : bits(a) % bits(b);
        return norm(r, t);
      }
      if (a.i == std::numeric_limits<std::int64_t>::min() && b.i == -1) {
        return op == XOp::Div ? norm(bits(a), t) : ival(0);
      }
      return norm(static_cast<std::uint64_t>(op == XOp::Div ? a.i / b.i : a.i % b.i), t);
    }
    case XOp::Shl:
    case XOp::Shr: {
      if (b.i < 0 || b.i >= bit_width(t)) throw EvalError{"shift count out of range"};
      if (op == XOp::Shl) return norm(bits(a) << b.i, t);
      return u ? norm(bits(a) >> b.i, t) : ival(a.i >> b.i);
    }
    case XOp::Lt: return ival(u ? bits(a) < bits(b) : a.i < b.i);
    case XOp::Le: return ival(u ? bits(a) <= bits(b) : a.i <= b.i);
    case XOp::Gt: return ival(u ? bits(a) > bits(b) : a.i > b.i);
    case XOp::Ge: return ival(u ? bits(a) >= bits(b) : a.i >= b.i);
    case XOp::Eq: return ival(a.i == b.i);
    case XOp::Ne: return ival(a.i != b.i);
    case XOp::BitAnd: return norm(bits(a) & bits(b), t);
    case XOp::BitXor: return norm(bits(a) ^ bits(b), t);
    case XOp::BitOr: return norm(bits(a) | bits(b), t);
    default: break;
  }
  throw EvalError{"bad binary operator"};
}

}  // namespace tensopt::sim::detail
