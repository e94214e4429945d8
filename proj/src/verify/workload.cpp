#include "tensopt/verify/workload.hpp"

#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "tensopt/verify/oracles.hpp"

namespace tensopt::verify {

namespace {
constexpr int kStates = 12;
constexpr int kInputs = 4;

std::size_t row_count(const ParamSpec& p) { return p.shape.empty() ? 1 : p.shape[0]; }
}  // namespace

std::string_view name_of(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Gemm: return "gemm";
    case WorkloadKind::Conv: return "conv";
    case WorkloadKind::TinyMpc: return "tinympc";
  }
  return "?";
}

std::optional<WorkloadKind> parse_workload_kind(std::string_view s) {
  for (auto k : {WorkloadKind::Gemm, WorkloadKind::Conv, WorkloadKind::TinyMpc}) {
    if (name_of(k) == s) return k;
  }
  return std::nullopt;
}

dsl::Bindings WorkloadSpec::bindings() const {
  if (kind != WorkloadKind::TinyMpc) return {};
  return {{"NHORIZON", nhorizon}, {"NSTATES", kStates}, {"NINPUTS", kInputs}};
}

std::string WorkloadSpec::fingerprint() const {
  switch (kind) {
    case WorkloadKind::Gemm:
      return fmt::format("gemm:{}x{}x{}{}:{}", M, K, N, bias ? "+bias" : "", name_of(elem));
    case WorkloadKind::Conv:
      return fmt::format("conv:b{}:c{}x{}:s{}:k{}:st{}:{}", conv.batch, conv.in_ch, conv.out_ch,
                         conv.spatial, conv.kernel, conv.stride, name_of(elem));
    case WorkloadKind::TinyMpc:
      return fmt::format("tinympc:h{}:{}", nhorizon, name_of(elem));
  }
  return "?";
}

std::string WorkloadSpec::check() const {
  switch (kind) {
    case WorkloadKind::Gemm:
      if (M <= 0 || K <= 0 || N <= 0) return "gemm dims must be positive";
      break;
    case WorkloadKind::Conv:
      if (conv.batch <= 0 || conv.in_ch <= 0 || conv.out_ch <= 0 || conv.spatial <= 0 ||
          conv.kernel <= 0 || conv.stride <= 0)
        return "conv dims must be positive";
      if (conv.kernel > conv.spatial) return "conv kernel larger than the input";
      break;
    case WorkloadKind::TinyMpc:
      if (nhorizon <= 0) return "tinympc horizon must be positive";
      if (elem != ElemType::Float32) return "tinympc needs a float32 accelerator";
      break;
  }
  if (is_float(scalar_of(elem)) != is_float(scalar_of(acc)))
    return "element and accumulator types must both be integer or both be float";
  return {};
}

WorkloadSpec gemm_spec(int M, int K, int N, ElemType elem, ElemType acc) {
  WorkloadSpec s;
  s.kind = WorkloadKind::Gemm;
  s.M = M, s.K = K, s.N = N;
  s.elem = elem, s.acc = acc;
  return s;
}

WorkloadSpec conv_spec(const ConvDims& d) {
  WorkloadSpec s;
  s.kind = WorkloadKind::Conv;
  s.conv = d;
  s.bias = true;
  return s;
}

WorkloadSpec tinympc_spec(int nhorizon) {
  WorkloadSpec s;
  s.kind = WorkloadKind::TinyMpc;
  s.nhorizon = nhorizon;
  s.elem = s.acc = ElemType::Float32;
  return s;
}

nlohmann::json to_json(const WorkloadSpec& s) {
  nlohmann::json j{{"kind", name_of(s.kind)},
                   {"elem", name_of(s.elem)},
                   {"acc", name_of(s.acc)}};
  switch (s.kind) {
    case WorkloadKind::Gemm:
      j["M"] = s.M, j["K"] = s.K, j["N"] = s.N, j["bias"] = s.bias;
      break;
    case WorkloadKind::Conv:
      j["conv"] = {{"batch", s.conv.batch},     {"in_ch", s.conv.in_ch},
                   {"out_ch", s.conv.out_ch},   {"spatial", s.conv.spatial},
                   {"kernel", s.conv.kernel},   {"stride", s.conv.stride}};
      break;
    case WorkloadKind::TinyMpc:
      j["nhorizon"] = s.nhorizon;
      break;
  }
  return j;
}

WorkloadSpec workload_from_json(const nlohmann::json& j) {
  auto kind = parse_workload_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown workload kind: " + j.at("kind").get<std::string>());
  WorkloadSpec s;
  switch (*kind) {
    case WorkloadKind::Gemm:
      s = gemm_spec(j.at("M"), j.at("K"), j.at("N"));
      s.bias = j.value("bias", false);
      break;
    case WorkloadKind::Conv: {
      ConvDims d;
      const auto& c = j.at("conv");
      d.batch = c.value("batch", d.batch);
      d.in_ch = c.value("in_ch", d.in_ch);
      d.out_ch = c.value("out_ch", d.out_ch);
      d.spatial = c.value("spatial", d.spatial);
      d.kernel = c.value("kernel", d.kernel);
      d.stride = c.value("stride", d.stride);
      s = conv_spec(d);
      break;
    }
    case WorkloadKind::TinyMpc:
      s = tinympc_spec(j.value("nhorizon", 5));
      break;
  }
  if (j.contains("elem")) {
    auto e = parse_elem_type(j["elem"].get<std::string>());
    if (!e) throw std::invalid_argument("unknown element type");
    s.elem = *e;
  }
  if (j.contains("acc")) {
    auto a = parse_elem_type(j["acc"].get<std::string>());
    if (!a) throw std::invalid_argument("unknown accumulator type");
    s.acc = *a;
  }
  return s;
}

std::vector<ParamSpec> param_specs(const WorkloadSpec& s) {
  const ScalarType et = scalar_of(s.elem), at = scalar_of(s.acc);
  auto sz = [](int v) { return static_cast<std::size_t>(v); };
  std::vector<ParamSpec> out;
  switch (s.kind) {
    case WorkloadKind::Gemm:
      out.push_back({"A", et, {sz(s.M), sz(s.K)}, Role::Input});
      out.push_back({"B", et, {sz(s.K), sz(s.N)}, Role::Input});
      out.push_back({"C", et, {sz(s.M), sz(s.N)}, Role::Output});
      if (s.bias) out.push_back({"D", at, {sz(s.N)}, Role::Input});
      break;
    case WorkloadKind::Conv: {
      const auto& d = s.conv;
      std::size_t o = sz(d.out_spatial());
      out.push_back({"inp", et, {sz(d.batch * d.spatial), sz(d.spatial), sz(d.in_ch)}, Role::Input});
      out.push_back({"weights", et, {sz(d.kernel * d.kernel * d.in_ch), sz(d.out_ch)}, Role::Input});
      if (s.bias) out.push_back({"bias", at, {sz(d.out_ch)}, Role::Input});
      out.push_back({"out", et, {sz(d.batch) * o, o, sz(d.out_ch)}, Role::Output});
      break;
    }
    case WorkloadKind::TinyMpc: {
      std::size_t nh = sz(s.nhorizon);
      out.push_back({"Adyn", et, {sz(kStates), sz(kStates)}, Role::Input});
      out.push_back({"Bdyn", et, {sz(kStates), sz(kInputs)}, Role::Input});
      out.push_back({"Kinf", et, {sz(kInputs), sz(kStates)}, Role::Input});
      out.push_back({"x", et, {nh + 1, sz(kStates), 1}, Role::InOut, 1, nh});
      out.push_back({"d", et, {nh, sz(kInputs), 1}, Role::Input});
      out.push_back({"u", et, {nh, sz(kInputs), 1}, Role::Output});
      break;
    }
  }
  for (auto& p : out) {
    if (p.role != Role::Input && p.compare_end == 0) p.compare_end = row_count(p);
  }
  return out;
}

TensorMap random_inputs(const WorkloadSpec& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Hand-rolled mapping: standard distributions differ between library vendors.
  auto uniform_int = [&](std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(rng() % span);
  };
  auto uniform_unit = [&] {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return -1.0 + 2.0 * u;
  };
  TensorMap m;
  for (const auto& p : param_specs(s)) {
    Tensor t(p.type, p.shape);
    const bool is_bias = p.type == ScalarType::I32 && p.role == Role::Input;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (is_float(p.type)) {
        t.set(i, uniform_unit());
      } else if (is_bias) {
        t.set_int(i, uniform_int(-4096, 4096));
      } else if (p.type == ScalarType::I32) {
        t.set_int(i, uniform_int(INT32_MIN, INT32_MAX));
      } else {
        t.set_int(i, uniform_int(-128, 127));
      }
    }
    m.emplace(p.name, std::move(t));
  }
  return m;
}

TensorMap reference_outputs(const WorkloadSpec& s, const TensorMap& in) {
  const ScalarType et = scalar_of(s.elem);
  TensorMap out;
  switch (s.kind) {
    case WorkloadKind::Gemm:
      out["C"] = reference_gemm(in.at("A"), in.at("B"), s.bias ? &in.at("D") : nullptr, et);
      break;
    case WorkloadKind::Conv:
      out["out"] = reference_conv(in.at("inp"), in.at("weights"), s.bias ? &in.at("bias") : nullptr,
                                  s.conv, et);
      break;
    case WorkloadKind::TinyMpc: {
      auto r = reference_tinympc_forward(in.at("Adyn"), in.at("Bdyn"), in.at("Kinf"), in.at("x"),
                                         in.at("d"), s.nhorizon);
      out["u"] = std::move(r.u);
      out["x"] = std::move(r.x);
      break;
    }
  }
  return out;
}

}  // namespace tensopt::verify
