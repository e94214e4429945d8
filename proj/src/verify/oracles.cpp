#include "tensopt/verify/oracles.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace tensopt::verify {
namespace {

// Kept separate from the simulator's conversion helpers on purpose.
std::int64_t to_int_rne(double v, ScalarType t) {
  double lo = 0, hi = 0;
  switch (t) {
    case ScalarType::I8: lo = -128, hi = 127; break;
    case ScalarType::I32: lo = std::numeric_limits<std::int32_t>::min(), hi = std::numeric_limits<std::int32_t>::max(); break;
    default: throw std::invalid_argument("unsupported oracle output type");
  }
  double r = std::nearbyint(v);  // default rounding mode: half to even
  if (r < lo) r = lo;
  if (r > hi) r = hi;
  return static_cast<std::int64_t>(r);
}

void need(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Tensor reference_gemm(const Tensor& A, const Tensor& B, const Tensor* bias, ScalarType out) {
  need(A.shape.size() == 2 && B.shape.size() == 2 && A.shape[1] == B.shape[0],
       "reference_gemm: A must be MxK and B KxN");
  const std::size_t M = A.shape[0], K = A.shape[1], N = B.shape[1];
  if (bias) need(bias->size() == N, "reference_gemm: bias must have N elements");
  const bool fp = is_float(A.type);
  need(fp == is_float(B.type), "reference_gemm: A and B must both be int or both be float");
  Tensor C(out, {M, N});
  if (fp) {
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        float s = 0.0f;
        for (std::size_t k = 0; k < K; ++k) {
          s += static_cast<float>(A.get(i * K + k)) * static_cast<float>(B.get(k * N + j));
        }
        if (bias) s += static_cast<float>(bias->get(j));
        C.set(i * N + j, s);
      }
    }
    return C;
  }
  // Unpacked copies (B transposed) keep the 12544-row case fast.
  std::vector<std::int32_t> a(M * K), bt(N * K);
  for (std::size_t i = 0; i < M * K; ++i) a[i] = static_cast<std::int32_t>(A.get_int(i));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < N; ++j) bt[j * K + k] = static_cast<std::int32_t>(B.get_int(k * N + j));
  }
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      std::uint32_t s = 0;  // wrapping int32 accumulation
      const std::int32_t* ar = &a[i * K];
      const std::int32_t* br = &bt[j * K];
      for (std::size_t k = 0; k < K; ++k) s += static_cast<std::uint32_t>(ar[k] * br[k]);
      if (bias) s += static_cast<std::uint32_t>(bias->get_int(j));
      C.set_int(i * N + j, to_int_rne(static_cast<std::int32_t>(s), out));
    }
  }
  return C;
}

Tensor reference_conv(const Tensor& input, const Tensor& weights, const Tensor* bias,
                      const ConvDims& d, ScalarType out) {
  const std::size_t Bn = d.batch, H = d.spatial, Ci = d.in_ch, Co = d.out_ch, R = d.kernel;
  const int O = d.out_spatial();
  need(O >= 1 && d.stride >= 1, "reference_conv: kernel larger than the input");
  need(input.size() == Bn * H * H * Ci, "reference_conv: input must hold batch*spatial*spatial*in_ch elements");
  need(weights.size() == R * R * Ci * Co, "reference_conv: weights must be [k*k*in_ch][out_ch]");
  if (bias) need(bias->size() == Co, "reference_conv: bias must have out_ch elements");
  const bool fp = is_float(input.type);
  const std::size_t Os = static_cast<std::size_t>(O);
  Tensor y(out, {Bn * Os, Os, Co});
  for (std::size_t b = 0; b < Bn; ++b) {
    for (std::size_t oy = 0; oy < Os; ++oy) {
      for (std::size_t ox = 0; ox < Os; ++ox) {
        for (std::size_t co = 0; co < Co; ++co) {
          std::uint32_t si = 0;
          float sf = 0.0f;
          for (std::size_t kh = 0; kh < R; ++kh) {
            for (std::size_t kw = 0; kw < R; ++kw) {
              for (std::size_t ci = 0; ci < Ci; ++ci) {
                std::size_t iy = oy * d.stride + kh, ix = ox * d.stride + kw;
                std::size_t in_idx = ((b * H + iy) * H + ix) * Ci + ci;
                std::size_t w_idx = ((kh * R + kw) * Ci + ci) * Co + co;
                if (fp) {
                  sf += static_cast<float>(input.get(in_idx)) * static_cast<float>(weights.get(w_idx));
                } else {
                  si += static_cast<std::uint32_t>(input.get_int(in_idx) * weights.get_int(w_idx));
                }
              }
            }
          }
          std::size_t o = ((b * Os + oy) * Os + ox) * Co + co;
          if (fp) {
            if (bias) sf += static_cast<float>(bias->get(co));
            y.set(o, sf);
          } else {
            if (bias) si += static_cast<std::uint32_t>(bias->get_int(co));
            y.set_int(o, to_int_rne(static_cast<std::int32_t>(si), out));
          }
        }
      }
    }
  }
  return y;
}

TinyMpcResult reference_tinympc_forward(const Tensor& Adyn, const Tensor& Bdyn, const Tensor& Kinf,
                                        const Tensor& x, const Tensor& d, int nhorizon, int chunk) {
  constexpr std::size_t NS = 12, NI = 4;
  const std::size_t NH = static_cast<std::size_t>(nhorizon);
  need(nhorizon >= 1, "reference_tinympc_forward: NHORIZON must be positive");
  need(chunk >= 1, "reference_tinympc_forward: chunk must be positive");
  need(Adyn.size() == NS * NS && Bdyn.size() == NS * NI && Kinf.size() == NI * NS,
       "reference_tinympc_forward: Adyn 12x12, Bdyn 12x4, Kinf 4x12 expected");
  need(x.size() == (NH + 1) * NS && d.size() == NH * NI,
       fmt::format("reference_tinympc_forward: x [{}][12][1] and d [{}][4][1] expected", NH + 1, NH));
  // Dot product of row `row` of m (width n) with v[0..n), in float32 partial sums of `chunk` terms.
  auto dot = [&](const Tensor& m, std::size_t row, std::size_t n, auto v) {
    float total = 0.0f;
    for (std::size_t c = 0; c < n; c += static_cast<std::size_t>(chunk)) {
      float part = 0.0f;
      for (std::size_t k = c; k < n && k < c + static_cast<std::size_t>(chunk); ++k) {
        part += static_cast<float>(m.get(row * n + k)) * v(k);
      }
      total += part;
    }
    return total;
  };
  TinyMpcResult r;
  r.x = x;
  r.u = Tensor(ScalarType::F32, {NH, NI, 1});
  for (std::size_t i = 0; i < NH; ++i) {
    float u[NI];
    for (std::size_t a = 0; a < NI; ++a) {
      float s = dot(Kinf, a, NS, [&](std::size_t k) { return static_cast<float>(r.x.get(i * NS + k)); });
      u[a] = -s - static_cast<float>(d.get(i * NI + a));
      r.u.set(i * NI + a, u[a]);
    }
    if (i + 1 >= NH) break;
    for (std::size_t a = 0; a < NS; ++a) {
      float ax = dot(Adyn, a, NS, [&](std::size_t k) { return static_cast<float>(r.x.get(i * NS + k)); });
      float bu = dot(Bdyn, a, NI, [&](std::size_t k) { return u[k]; });
      r.x.set((i + 1) * NS + a, ax + bu);
    }
  }
  return r;
}

}  // namespace tensopt::verify
