#include "tensopt/core/scalar.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tensopt {

std::size_t byte_size(ScalarType t) {
  switch (t) {
    case ScalarType::Bool:
    case ScalarType::I8:
    case ScalarType::U8: return 1;
    case ScalarType::I16:
    case ScalarType::U16: return 2;
    case ScalarType::I32:
    case ScalarType::U32:
    case ScalarType::F32: return 4;
    case ScalarType::I64:
    case ScalarType::U64:
    case ScalarType::F64: return 8;
  }
  return 0;
}

int bit_width(ScalarType t) { return static_cast<int>(byte_size(t)) * 8; }

bool is_float(ScalarType t) { return t == ScalarType::F32 || t == ScalarType::F64; }

bool is_signed(ScalarType t) {
  switch (t) {
    case ScalarType::I8:
    case ScalarType::I16:
    case ScalarType::I32:
    case ScalarType::I64:
    case ScalarType::F32:
    case ScalarType::F64: return true;
    default: return false;
  }
}

std::string_view name_of(ScalarType t) {
  switch (t) {
    case ScalarType::Bool: return "bool";
    case ScalarType::I8: return "int8";
    case ScalarType::U8: return "uint8";
    case ScalarType::I16: return "int16";
    case ScalarType::U16: return "uint16";
    case ScalarType::I32: return "int32";
    case ScalarType::U32: return "uint32";
    case ScalarType::I64: return "int64";
    case ScalarType::U64: return "uint64";
    case ScalarType::F32: return "float32";
    case ScalarType::F64: return "float64";
  }
  return "?";
}

ScalarType scalar_of(ElemType e) {
  switch (e) {
    case ElemType::Int8: return ScalarType::I8;
    case ElemType::Int32: return ScalarType::I32;
    case ElemType::Float32: return ScalarType::F32;
  }
  return ScalarType::I8;
}

std::string_view name_of(ElemType e) { return name_of(scalar_of(e)); }

std::optional<ElemType> parse_elem_type(std::string_view s) {
  if (s == "int8" || s == "int8_t") return ElemType::Int8;
  if (s == "int32" || s == "int32_t") return ElemType::Int32;
  if (s == "float32" || s == "float" || s == "fp32") return ElemType::Float32;
  return std::nullopt;
}

std::optional<ScalarType> resolve_type(std::string_view s, ElemType elem, ElemType acc) {
  if (s == "elem_t") return scalar_of(elem);
  if (s == "acc_t") return scalar_of(acc);
  if (s == "int8_t") return ScalarType::I8;
  if (s == "uint8_t") return ScalarType::U8;
  if (s == "int16_t") return ScalarType::I16;
  if (s == "uint16_t") return ScalarType::U16;
  if (s == "int32_t") return ScalarType::I32;
  if (s == "uint32_t") return ScalarType::U32;
  if (s == "int64_t" || s == "int_fast32_t" || s == "int_fast16_t") return ScalarType::I64;
  if (s == "uint64_t" || s == "size_t" || s == "uint_fast32_t") return ScalarType::U64;
  if (s == "float" || s == "scale_t") return ScalarType::F32;
  if (s == "double") return ScalarType::F64;
  if (s == "bool") return ScalarType::Bool;
  // Multi-word integer spellings: "unsigned", "long long", "unsigned char", ...
  std::string str(s);
  bool is_unsigned = str.find("unsigned") != std::string::npos;
  bool known = false;
  for (std::string_view w : {"unsigned", "signed", "int", "long", "short", "char"}) {
    if (str.find(w) != std::string::npos) known = true;
  }
  if (!known) return std::nullopt;
  if (str.find("char") != std::string::npos) return is_unsigned ? ScalarType::U8 : ScalarType::I8;
  if (str.find("short") != std::string::npos) return is_unsigned ? ScalarType::U16 : ScalarType::I16;
  if (str.find("long") != std::string::npos) return is_unsigned ? ScalarType::U64 : ScalarType::I64;
  return is_unsigned ? ScalarType::U32 : ScalarType::I32;
}

namespace {

std::int64_t min_of(ScalarType t) {
  if (t == ScalarType::Bool || !is_signed(t)) return 0;
  if (t == ScalarType::I64) return std::numeric_limits<std::int64_t>::min();
  return -(std::int64_t{1} << (bit_width(t) - 1));
}

std::int64_t max_of(ScalarType t) {
  if (t == ScalarType::Bool) return 1;
  if (t == ScalarType::I64 || t == ScalarType::U64) return std::numeric_limits<std::int64_t>::max();
  if (is_signed(t)) return (std::int64_t{1} << (bit_width(t) - 1)) - 1;
  return (std::int64_t{1} << bit_width(t)) - 1;
}

}  // namespace

std::int64_t saturate_int(std::int64_t v, ScalarType t) {
  if (v < min_of(t)) return min_of(t);
  if (v > max_of(t)) return max_of(t);
  return v;
}

std::int64_t round_saturate(double v, ScalarType t) {
  if (std::isnan(v)) return 0;
  double r = std::nearbyint(v);  // default rounding mode: half to even
  double lo = static_cast<double>(min_of(t));
  double hi = static_cast<double>(max_of(t));
  if (r <= lo) return min_of(t);
  if (r >= hi) return max_of(t);
  return static_cast<std::int64_t>(r);
}

std::int64_t wrap_int(std::int64_t v, ScalarType t) {
  auto u = static_cast<std::uint64_t>(v);
  switch (t) {
    case ScalarType::Bool: return v != 0 ? 1 : 0;
    case ScalarType::I8: return static_cast<std::int8_t>(u);
    case ScalarType::U8: return static_cast<std::uint8_t>(u);
    case ScalarType::I16: return static_cast<std::int16_t>(u);
    case ScalarType::U16: return static_cast<std::uint16_t>(u);
    case ScalarType::I32: return static_cast<std::int32_t>(u);
    case ScalarType::U32: return static_cast<std::uint32_t>(u);
    default: return v;
  }
}

}  // namespace tensopt
