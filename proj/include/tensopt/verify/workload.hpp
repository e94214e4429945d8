#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tensopt/core/tensor.hpp"
#include "tensopt/dsl/validate.hpp"

namespace tensopt::verify {

enum class WorkloadKind { Gemm, Conv, TinyMpc };

std::string_view name_of(WorkloadKind k);
std::optional<WorkloadKind> parse_workload_kind(std::string_view s);

/// NHWC convolution without padding. Kernels see the input as
/// [batch * spatial][spatial][in_ch] and the output as
/// [batch * out_spatial][out_spatial][out_ch] (arrays have at most three
/// dims). Weights are [kernel * kernel * in_ch][out_ch] in (kh, kw, ci) row order.
struct ConvDims {
  int batch = 1;
  int in_ch = 16;
  int out_ch = 16;
  int spatial = 9;  // input height = width
  int kernel = 3;
  int stride = 1;

  int out_spatial() const { return (spatial - kernel) / stride + 1; }
  bool operator==(const ConvDims&) const = default;
};

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Gemm;
  // gemm: C[M][N] = A[M][K] * B[K][N] (+ bias D[N] when `bias`)
  int M = 0, K = 0, N = 0;
  bool bias = false;
  ConvDims conv;
  int nhorizon = 5;  // tinympc; NSTATES = 12, NINPUTS = 4
  ElemType elem = ElemType::Int8;
  ElemType acc = ElemType::Int32;

  /// Named constants the kernel may use (NHORIZON and friends).
  dsl::Bindings bindings() const;
  /// Short identity used to match recorded schedules, e.g. "gemm:512x512x512:int8".
  std::string fingerprint() const;
  /// Empty when the dims are usable, otherwise the problem.
  std::string check() const;

  bool operator==(const WorkloadSpec&) const = default;
};

WorkloadSpec gemm_spec(int M, int K, int N, ElemType elem = ElemType::Int8,
                       ElemType acc = ElemType::Int32);
WorkloadSpec conv_spec(const ConvDims& d);
WorkloadSpec tinympc_spec(int nhorizon = 5);

nlohmann::json to_json(const WorkloadSpec& s);
WorkloadSpec workload_from_json(const nlohmann::json& j);

enum class Role { Input, Output, InOut };

/// One kernel parameter the harness fills or checks. For Output and InOut
/// params, [compare_begin, compare_end) limits the comparison to a range of the
/// first dimension (TinyMPC x skips x[0] and x[NHORIZON]).
struct ParamSpec {
  std::string name;
  ScalarType type = ScalarType::I8;
  std::vector<std::size_t> shape;
  Role role = Role::Input;
  std::size_t compare_begin = 0;
  std::size_t compare_end = 0;  // 0 means all rows
};

std::vector<ParamSpec> param_specs(const WorkloadSpec& s);

/// Fresh random inputs: int8 uniform in [-128, 127], float uniform in [-1, 1],
/// int32 bias uniform in [-4096, 4096]. Outputs are filled with random values
/// too so that unwritten elements are caught.
TensorMap random_inputs(const WorkloadSpec& s, std::uint64_t seed);

/// Expected outputs for the given inputs (Output and InOut params only).
TensorMap reference_outputs(const WorkloadSpec& s, const TensorMap& inputs);

}  // namespace tensopt::verify
