#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace tensopt {

enum class ScalarType { Bool, I8, U8, I16, U16, I32, U32, I64, U64, F32, F64 };

std::size_t byte_size(ScalarType t);
int bit_width(ScalarType t);
bool is_float(ScalarType t);
bool is_signed(ScalarType t);
std::string_view name_of(ScalarType t);

/// Accelerator element types (instance A is int8/int32, instance B fp32/fp32).
enum class ElemType { Int8, Int32, Float32 };

ScalarType scalar_of(ElemType e);
std::string_view name_of(ElemType e);
std::optional<ElemType> parse_elem_type(std::string_view s);

/// Resolves a DSL type spelling. `elem_t`/`acc_t` depend on the accelerator.
std::optional<ScalarType> resolve_type(std::string_view spelling, ElemType elem, ElemType acc);

/// Round half to even, then saturate to the integer range of `t`.
std::int64_t round_saturate(double v, ScalarType t);

/// Wrap an integer into the value range of `t` (two's complement truncation).
std::int64_t wrap_int(std::int64_t v, ScalarType t);

/// Clamp an integer into the range of `t`.
std::int64_t saturate_int(std::int64_t v, ScalarType t);

}  // namespace tensopt
