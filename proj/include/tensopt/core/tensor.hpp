#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tensopt/core/scalar.hpp"

namespace tensopt {

/// Dense row-major array stored as raw little-endian bytes of `type`.
struct Tensor {
  ScalarType type = ScalarType::I8;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;

  Tensor() = default;
  Tensor(ScalarType t, std::vector<std::size_t> dims);

  std::size_t size() const;  // element count
  std::size_t elem_bytes() const { return byte_size(type); }

  double get(std::size_t i) const;
  std::int64_t get_int(std::size_t i) const;
  // Integer stores wrap; float stores round to the storage precision.
  void set(std::size_t i, double v);
  void set_int(std::size_t i, std::int64_t v);

  std::vector<std::size_t> unflatten(std::size_t i) const;

  bool operator==(const Tensor&) const = default;
};

using TensorMap = std::map<std::string, Tensor>;

/// Reads one element of type `t` from raw bytes.
double load_scalar(const std::uint8_t* p, ScalarType t);
std::int64_t load_int(const std::uint8_t* p, ScalarType t);
void store_scalar(std::uint8_t* p, ScalarType t, double v);
void store_int(std::uint8_t* p, ScalarType t, std::int64_t v);

}  // namespace tensopt
