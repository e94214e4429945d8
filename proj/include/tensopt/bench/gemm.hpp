#pragma once

#include <string>
#include <vector>

namespace tensopt::bench {

/// Unoptimized int8 GEMM kernel (C[M][N] = A[M][K] * B[K][N]) in the style of
/// the Exo-generated baseline, for a 16x16 accelerator. M, K and N must be
/// multiples of 16.
std::string gemm_unopt(int M, int K, int N);

/// Kernels along a fixed nine-step optimization schedule for the same GEMM.
/// Stage 0 is gemm_unopt; stage i applies step i on top of stage i - 1.
/// Stages 1+ need N and K multiples of 64 and K <= 512.
int gemm_stage_count();
std::string gemm_stage(int M, int K, int N, int stage);

}  // namespace tensopt::bench
