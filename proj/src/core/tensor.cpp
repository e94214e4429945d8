#include "tensopt/core/tensor.hpp"

#include <cmath>
#include <cstring>

namespace tensopt {

Tensor::Tensor(ScalarType t, std::vector<std::size_t> dims) : type(t), shape(std::move(dims)) {
  bytes.assign(size() * byte_size(t), 0);
}

std::size_t Tensor::size() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

double Tensor::get(std::size_t i) const { return load_scalar(&bytes[i * elem_bytes()], type); }

std::int64_t Tensor::get_int(std::size_t i) const {
  return load_int(&bytes[i * elem_bytes()], type);
}

void Tensor::set(std::size_t i, double v) { store_scalar(&bytes[i * elem_bytes()], type, v); }

void Tensor::set_int(std::size_t i, std::int64_t v) {
  store_int(&bytes[i * elem_bytes()], type, v);
}

std::vector<std::size_t> Tensor::unflatten(std::size_t i) const {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t d = shape.size(); d-- > 0;) {
    idx[d] = i % shape[d];
    i /= shape[d];
  }
  return idx;
}

std::int64_t load_int(const std::uint8_t* p, ScalarType t) {
  switch (t) {
    case ScalarType::Bool:
    case ScalarType::U8: return *p;
    case ScalarType::I8: return static_cast<std::int8_t>(*p);
    case ScalarType::I16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::U16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::I32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::U32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::I64:
    case ScalarType::U64: { std::int64_t v; std::memcpy(&v, p, 8); return v; }
    case ScalarType::F32: { float v; std::memcpy(&v, p, 4); return static_cast<std::int64_t>(v); }
    case ScalarType::F64: { double v; std::memcpy(&v, p, 8); return static_cast<std::int64_t>(v); }
  }
  return 0;
}

double load_scalar(const std::uint8_t* p, ScalarType t) {
  if (t == ScalarType::F32) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (t == ScalarType::F64) {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (t == ScalarType::U64) {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    return static_cast<double>(v);
  }
  return static_cast<double>(load_int(p, t));
}

void store_int(std::uint8_t* p, ScalarType t, std::int64_t v) {
  if (is_float(t)) {
    store_scalar(p, t, static_cast<double>(v));
    return;
  }
  auto w = static_cast<std::uint64_t>(wrap_int(v, t));
  std::memcpy(p, &w, byte_size(t));  // little-endian host
}

void store_scalar(std::uint8_t* p, ScalarType t, double v) {
  if (t == ScalarType::F32) {
    auto f = static_cast<float>(v);
    std::memcpy(p, &f, 4);
  } else if (t == ScalarType::F64) {
    std::memcpy(p, &v, 8);
  } else {
    store_int(p, t, static_cast<std::int64_t>(std::trunc(v)));
  }
}

}  // namespace tensopt
