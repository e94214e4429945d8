#pragma once

#include <optional>

#include "tensopt/core/tensor.hpp"
#include "tensopt/verify/workload.hpp"

namespace tensopt::verify {

/// C = A * B (+ bias broadcast over rows). Integer inputs accumulate in int32
/// (wrapping) and convert to the output type by round-half-even and
/// saturation; float inputs accumulate in float32 with k innermost.
/// Throws std::invalid_argument on shape mismatch.
Tensor reference_gemm(const Tensor& A, const Tensor& B, const Tensor* bias = nullptr,
                      ScalarType out = ScalarType::I8);

/// NHWC convolution, same accumulation and conversion rules as gemm.
Tensor reference_conv(const Tensor& input, const Tensor& weights, const Tensor* bias,
                      const ConvDims& d, ScalarType out = ScalarType::I8);

struct TinyMpcResult {
  Tensor u;  // [NHORIZON][4][1]
  Tensor x;  // [NHORIZON + 1][12][1]; rows 0..NHORIZON-1 are meaningful
};

/// u[i] = -Kinf x[i] - d[i]; x[i+1] = Adyn x[i] + Bdyn u[i], in float32.
/// x[i+1] is computed only for i + 1 < NHORIZON; x[NHORIZON] is copied from `x`.
/// Dot products sum `chunk` terms at a time and then add the partial sums,
/// the order a chunk-wide array accumulates in. With a plain running sum the
/// error growth over the horizon exceeds the float tolerance on some inputs.
TinyMpcResult reference_tinympc_forward(const Tensor& Adyn, const Tensor& Bdyn, const Tensor& Kinf,
                                        const Tensor& x, const Tensor& d, int nhorizon,
                                        int chunk = 4);

}  // namespace tensopt::verify
